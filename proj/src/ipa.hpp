#pragma once

#include <cstddef>
#include <vector>

#include "backward_sampler.hpp"

namespace fjsim {

// Pathwise derivative of the stationary sojourn time with respect to the
// service rates, built from one backward path.
struct GradientSample {
  std::vector<std::size_t> last_empty;  // first n >= 0 with W_k(-n) = 0
  std::vector<double> waiting_deriv;    // d W_k(0) / d mu_k along the path
  int argmax_k = 0;                     // coordinate attaining the sojourn max
  bool argmax_tied = false;             // exact float tie (lowest index wins)
  std::vector<double> per_station;      // d S(0) / d mu_k estimate
};

// First n >= 0 whose waiting time is exactly zero, deepening the horizon as
// needed. Exists with probability one for every stable coordinate.
std::size_t last_empty_epoch(BackwardPath& path, int k);

// -(1/mu_k^2) * sum of the requirements J_k(1..n_k) up to that epoch.
double waiting_derivative(const BackwardPath& path, int k, std::size_t last_empty);

// Index attaining max_k(waiting0[k] + req0[k] / rate_k); ties resolved to the
// lowest index and flagged.
int argmax_station(const std::vector<double>& waiting0, const std::vector<double>& req0,
                   const std::vector<double>& rates, bool* tied);

// Full per-path gradient: only the argmax coordinate carries a nonzero term,
//   per_station[k] = 1{k = argmax} * (waiting_deriv[k] - req0[k] / mu_k^2).
GradientSample gradient_estimator(BackwardPath& path, const std::vector<double>& req0);

}  // namespace fjsim
