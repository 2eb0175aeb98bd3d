#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "backward_sampler.hpp"
#include "model.hpp"
#include "observables.hpp"

namespace fjsim {

struct QuantityStat {
  double mean = 0.0;
  double sd = 0.0;          // sample standard deviation, n - 1 divisor
  double half_width = 0.0;  // 1.96 * sd / sqrt(n)
};

// Mean and normal 95% half-width of a batch of replications (needs n >= 2).
QuantityStat ci(const std::vector<double>& values);

// Scalar read off one replication.
enum class Quantity {
  Sojourn,       // S(0)
  UnsyncTotal,   // sum_k D_k(0)
  Queue,         // Q_k(0), station-indexed
  Unsync,        // D_k(0), station-indexed
  Gradient,      // d S(0) / d mu_k, station-indexed
  GradientSum,   // sum_k of the gradient coordinates
};

double sample_quantity(const StationarySample& s, Quantity q, int station = 0);

struct EstimateReport {
  int stations = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  QuantityStat sojourn, unsync_total, gradient_sum;
  std::vector<QuantityStat> queue, unsync, gradient;
  // replication diagnostics
  double mean_stop_index = 0.0;
  std::uint64_t max_stop_index = 0;
  double mean_steps = 0.0;
  std::uint64_t argmax_ties = 0;
  std::uint64_t horizon_extensions = 0;

  // Timing is the one run-dependent field; leaving it out makes the text a
  // pure function of (model, reps, seed, options).
  std::string to_json(bool include_timing) const;
};

// reps independent replications on substreams derive_seed(seed, rep),
// reduced in replication order so the result is identical for any thread
// count. A budget failure is rethrown carrying the smallest failing
// replication index.
EstimateReport run_experiment(const NetworkModel& model, int reps, std::uint64_t seed,
                              const SamplerOptions& options = {}, int threads = 1);

struct CoverageResult {
  int covered = 0;
  int total = 0;
};

// Builds n_cis independent confidence intervals (reps_per_ci replications
// each, run seeds derive_seed(seed, i)) and counts how many cover truth.
CoverageResult coverage_experiment(const NetworkModel& model, Quantity quantity, int station,
                                   double truth, int n_cis, int reps_per_ci, std::uint64_t seed,
                                   const SamplerOptions& options = {}, int threads = 1);

}  // namespace fjsim
