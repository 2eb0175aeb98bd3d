#include "ipa.hpp"

#include "errors.hpp"

namespace fjsim {

std::size_t last_empty_epoch(BackwardPath& path, int k) {
  std::size_t n = 0;
  while (true) {
    if (n > path.horizon()) path.extend_to(path.horizon() + 64);
    // The future maximum is carried forward as the exact same double once it
    // is attained, so equality with the walk is a clean signal here.
    if (path.waiting(n, k) == 0.0) return n;
    ++n;
  }
}

double waiting_derivative(const BackwardPath& path, int k, std::size_t last_empty) {
  const double mu = path.rates()[k];
  double sum = 0.0;
  for (std::size_t n = 1; n <= last_empty; ++n) sum += path.requirement(n, k);
  return -sum / (mu * mu);
}

int argmax_station(const std::vector<double>& waiting0, const std::vector<double>& req0,
                   const std::vector<double>& rates, bool* tied) {
  if (waiting0.empty() || waiting0.size() != req0.size() || waiting0.size() != rates.size())
    raise(ErrorCode::InvalidArgument, "argmax inputs must be equally sized and nonempty");
  int best = 0;
  bool tie = false;
  double best_val = waiting0[0] + req0[0] / rates[0];
  for (int k = 1; k < static_cast<int>(waiting0.size()); ++k) {
    const double val = waiting0[k] + req0[k] / rates[k];
    if (val > best_val) {
      best = k;
      best_val = val;
      tie = false;
    } else if (val == best_val) {
      tie = true;
    }
  }
  if (tied) *tied = tie;
  return best;
}

GradientSample gradient_estimator(BackwardPath& path, const std::vector<double>& req0) {
  const int K = path.stations();
  GradientSample g;
  g.last_empty.resize(K);
  g.waiting_deriv.resize(K);
  g.per_station.assign(K, 0.0);
  std::vector<double> waiting0(K);
  for (int k = 0; k < K; ++k) waiting0[k] = path.waiting(0, k);
  g.argmax_k = argmax_station(waiting0, req0, path.rates(), &g.argmax_tied);
  for (int k = 0; k < K; ++k) {
    g.last_empty[k] = last_empty_epoch(path, k);
    g.waiting_deriv[k] = waiting_derivative(path, k, g.last_empty[k]);
  }
  const int k0 = g.argmax_k;
  const double mu = path.rates()[k0];
  g.per_station[k0] = g.waiting_deriv[k0] - req0[k0] / (mu * mu);
  return g;
}

}  // namespace fjsim
