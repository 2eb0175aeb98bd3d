#pragma once

#include <cstdint>
#include <vector>

#include "backward_sampler.hpp"
#include "ipa.hpp"

namespace fjsim {

// Counts read off the time origin of one backward path.
struct QueueSnapshot {
  std::vector<std::int64_t> queue;   // jobs present at station k (waiting or in service)
  std::vector<std::int64_t> unsync;  // jobs done at station k, still waiting on the join
  std::int64_t unsync_total = 0;
};

// Sojourn times S(-n) for n = 0..stopping_index; entry 0 uses the fresh
// requirement vector req0, deeper entries reuse the path's requirements.
std::vector<double> sojourn_times(const BackwardPath& path, const std::vector<double>& req0);

// Indicator sums over n = 1..stopping_index against the arrival clock:
// a job is at station k while A(-n) + W_k(-n) + J_k(n)/mu_k > 0, and holds
// the join while that has turned negative but A(-n) + S(-n) is still
// positive. The stopping index makes both sums exhaustive: the indicator
// argument falls by at least the service time per step, so it stays negative
// beyond the first n where every coordinate is negative.
QueueSnapshot queue_snapshot(const BackwardPath& path, const std::vector<double>& sojourns);

// Everything the estimators consume from one draw of the stationary state.
struct StationarySample {
  double sojourn = 0.0;                 // S(0)
  std::vector<double> req0;             // J_k(0)
  std::vector<double> waiting0;         // W_k(0)
  std::vector<std::int64_t> queue;      // Q_k(0)
  std::vector<std::int64_t> unsync;     // D_k(0)
  std::int64_t unsync_total = 0;
  std::vector<double> gradient;         // d S(0) / d mu_k, one-coordinate support
  std::vector<std::size_t> last_empty;  // per-station zero-waiting epoch
  int argmax_k = 0;
  bool argmax_tied = false;
  std::size_t stop_index = 0;
  bool tau_horizon_extended = false;  // zero-waiting search went past the stop horizon
  std::uint64_t steps = 0;            // increment draws consumed, discards included
};

// One exact draw: requirement vector first, then the backward path (its
// equilibrium interarrival, then the increment stream), all from the given
// stream so a seed pins the sample bit for bit.
StationarySample draw_stationary_sample(const NetworkModel& model, const CramerRoots& roots,
                                        RngStream rng, const SamplerOptions& options = {});

}  // namespace fjsim
