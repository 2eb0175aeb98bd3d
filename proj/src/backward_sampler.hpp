#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "model.hpp"
#include "rng.hpp"

namespace fjsim {

struct SamplerOptions {
  // Certification gap in units of 1 / theta_k; see milestone_level.
  double milestone_c = 2.0;
  // Ceiling on increment draws (including discarded proposals) per path.
  std::uint64_t step_budget = 100'000'000ULL;
};

// L_k = c / theta_k, the descent a coordinate must make below its running
// maximum before its future maximum can be pinned down. Coordinates with no
// tilting root (theta = +inf) never climb and get level 0.
std::vector<double> milestone_level(const CramerRoots& roots, double c = 2.0);

namespace detail {
class PathEngine;
}

// One realization of the time-reversed stationary construction
//
//   R(0) = 0,  R_k(n) = R_k(n-1) + (J_k(n) / mu_k - I(n)),
//   M_k(n) = sup over m >= n of R_k(m),   W*_k(-n) = M_k(n) - R_k(n),
//
// materialized down to horizon() with the maxima exact, not bounds: the
// unrevealed tail is certified to stay below the realized window maxima.
// The stopping index N marks where the snapshot sums can be truncated, and
// the arrival clock A(-n) runs on an equilibrium draw in place of I(1).
class BackwardPath {
 public:
  BackwardPath(BackwardPath&&) noexcept;
  BackwardPath& operator=(BackwardPath&&) noexcept;
  ~BackwardPath();

  int stations() const { return static_cast<int>(rates_.size()); }
  const std::vector<double>& rates() const { return rates_; }

  std::size_t stopping_index() const { return stop_; }  // N
  std::size_t horizon() const;                          // deepest exact index
  bool tau_horizon_extended() const { return extended_; }
  double eq_interarrival() const { return eq_inter_; }
  std::uint64_t steps_used() const;

  double interarrival(std::size_t n) const;             // I(n), 1 <= n <= horizon
  double requirement(std::size_t n, int k) const;       // J_k(n)
  double service_time(std::size_t n, int k) const;      // J_k(n) / mu_k
  double walk(std::size_t n, int k) const;              // R_k(n)
  double future_max(std::size_t n, int k) const;        // M_k(n)
  double waiting(std::size_t n, int k) const;           // W*_k(-n)
  double arrival_clock(std::size_t n) const;            // A(-n), A(0) = 0

  // Deepen the exact horizon (used when the last empty epoch lies beyond N).
  void extend_to(std::size_t n);

  // Assemble a path from fixed vectors, for tests of downstream consumers.
  // interarrivals[i] = I(i+1), requirements[i*K + k] = J_k(i+1). extend_to
  // beyond the given data throws.
  static BackwardPath from_components(std::vector<double> rates, double eq_interarrival,
                                      std::vector<double> interarrivals,
                                      std::vector<double> requirements, std::size_t stop);

 private:
  friend BackwardPath simulate_backward_path(const NetworkModel&, const CramerRoots&, RngStream,
                                             const SamplerOptions&);
  BackwardPath();

  void ensure_clock(std::size_t n) const;
  void resolve_stopping();

  std::unique_ptr<detail::PathEngine> engine_;
  std::vector<double> rates_;
  double eq_inter_ = 0.0;
  std::size_t stop_ = 0;
  bool extended_ = false;
  mutable std::vector<double> clock_;  // A(-n) cache, index n

  // storage for from_components paths (engine_ == nullptr)
  std::vector<double> fixed_inter_, fixed_req_, fixed_walk_, fixed_max_;
  std::size_t fixed_horizon_ = 0;
};

// Draws the path, resolves the stopping index, and leaves the sampler inside
// the returned object so the horizon can be extended later. The rng is taken
// by value: the caller's stream is not advanced.
BackwardPath simulate_backward_path(const NetworkModel& model, const CramerRoots& roots,
                                    RngStream rng, const SamplerOptions& options = {});

}  // namespace fjsim
