#include "observables.hpp"

#include <algorithm>
#include <utility>

#include "errors.hpp"

namespace fjsim {

std::vector<double> sojourn_times(const BackwardPath& path, const std::vector<double>& req0) {
  const int K = path.stations();
  if (static_cast<int>(req0.size()) != K)
    raise(ErrorCode::InvalidArgument, "req0 must hold one requirement per station");
  const std::size_t N = path.stopping_index();
  std::vector<double> out(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    double s = -1.0;
    for (int k = 0; k < K; ++k) {
      const double svc = (n == 0) ? req0[k] / path.rates()[k] : path.service_time(n, k);
      s = std::max(s, path.waiting(n, k) + svc);
    }
    out[n] = s;
  }
  return out;
}

QueueSnapshot queue_snapshot(const BackwardPath& path, const std::vector<double>& sojourns) {
  const int K = path.stations();
  const std::size_t N = path.stopping_index();
  if (sojourns.size() < N + 1)
    raise(ErrorCode::InvalidArgument, "sojourns must cover indices 0..stopping_index");
  QueueSnapshot snap;
  snap.queue.assign(K, 0);
  snap.unsync.assign(K, 0);
  for (std::size_t n = 1; n <= N; ++n) {
    const double clock = path.arrival_clock(n);
    const bool departed = !(clock + sojourns[n] > 0.0);
    for (int k = 0; k < K; ++k) {
      const double arg = clock + path.waiting(n, k) + path.service_time(n, k);
      if (arg > 0.0) {
        ++snap.queue[k];
      } else if (arg < 0.0 && !departed) {
        ++snap.unsync[k];
      }
    }
  }
  for (int k = 0; k < K; ++k) snap.unsync_total += snap.unsync[k];
  return snap;
}

StationarySample draw_stationary_sample(const NetworkModel& model, const CramerRoots& roots,
                                        RngStream rng, const SamplerOptions& options) {
  const int K = model.stations();
  StationarySample s;
  s.req0.resize(K);
  for (int k = 0; k < K; ++k) s.req0[k] = model.service_req[k].sample(rng);
  BackwardPath path = simulate_backward_path(model, roots, std::move(rng), options);

  s.waiting0.resize(K);
  for (int k = 0; k < K; ++k) s.waiting0[k] = path.waiting(0, k);
  const std::vector<double> sojourns = sojourn_times(path, s.req0);
  s.sojourn = sojourns[0];
  QueueSnapshot snap = queue_snapshot(path, sojourns);
  s.queue = std::move(snap.queue);
  s.unsync = std::move(snap.unsync);
  s.unsync_total = snap.unsync_total;

  GradientSample g = gradient_estimator(path, s.req0);
  s.gradient = std::move(g.per_station);
  s.last_empty = std::move(g.last_empty);
  s.argmax_k = g.argmax_k;
  s.argmax_tied = g.argmax_tied;

  s.stop_index = path.stopping_index();
  s.tau_horizon_extended = path.tau_horizon_extended();
  s.steps = path.steps_used();
  return s;
}

}  // namespace fjsim
