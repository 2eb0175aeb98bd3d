#pragma once

#include <cstdint>
#include <vector>

#include "model.hpp"
#include "rng.hpp"

namespace fjsim {

// Closed forms for the two-station network with exponential interarrivals
// (rate lambda), unit-rate exponential requirements, and equal service rates
// mu at both stations.
double mm_forkjoin_mean_sojourn(double lambda, double mu);
double mm_forkjoin_mean_unsync(double lambda, double mu);
double mm_forkjoin_sojourn_derivative(double lambda, double mu);  // d E[S] / d mu

// Long-run averages measured by brute force: Lindley recursion started from
// an empty system, jobs (warmup, horizon] averaged for the sojourn, and the
// clock interval [arrival(warmup), arrival(horizon)] time-averaged for the
// occupancy counts. Standard errors come from batch means and are zero for
// degenerate (deterministic) models.
struct BurnInEstimate {
  double sojourn = 0.0;
  double sojourn_se = 0.0;
  std::vector<double> queue, queue_se;
  std::vector<double> unsync, unsync_se;
  double unsync_total = 0.0;
  double unsync_total_se = 0.0;
};

BurnInEstimate burn_in_estimate(const NetworkModel& model, std::uint64_t warmup,
                                std::uint64_t horizon, RngStream rng, int batches = 32);

// Central finite difference of the burn-in sojourn in one service rate, the
// two perturbed runs driven by the same stream per replication.
struct FdEstimate {
  double mean = 0.0;
  double se = 0.0;
};

FdEstimate finite_difference_gradient(const NetworkModel& model, int station, double step,
                                      int reps, std::uint64_t seed, std::uint64_t warmup,
                                      std::uint64_t horizon);

}  // namespace fjsim
