// Lazy exact construction of the stationary backward waiting-time path.
//
// The driving increments are revealed left to right while a vector of
// in-force ceilings ("barriers") certifies that the unrevealed tail never
// exceeds them, coordinate by coordinate. The certificate is maintained by
// three moves, each an exact conditional step:
//
//  * milestone descent: a nominal segment, rejected while it violates the
//    barriers, accepted once every certified coordinate has dropped its gap
//    below the running maximum and the certificate re-verifies beyond the
//    endpoint;
//  * record-break check: a single-coordinate exponential tilt chosen from a
//    mixture weighted by exp(-theta_k * gap_k), run to the first crossing of
//    the candidate ceilings and accepted with the exact likelihood ratio of
//    the stopped proposal. Rejection certifies every candidate at once.
//  * barrier tightening: candidates sit one gap above the current walk; a
//    rejected record break lowers all barriers there, an accepted one is a
//    real climb of the path and keeps the barriers in place.
//
// A prefix index is final once the window maximum of the revealed walk
// reaches the barrier: the certified tail can no longer alter the future
// maximum, so M and W = M - R below that index are exact, not bounds.
// Coordinates whose one-step rise is never positive need no certificates at
// all; their future maximum is the current value.

#include "backward_sampler.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "errors.hpp"

namespace fjsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<double> milestone_level(const CramerRoots& roots, double c) {
  if (!(c > 0.0)) raise(ErrorCode::InvalidArgument, "milestone constant must be positive");
  std::vector<double> out(roots.theta.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = roots.monotone(static_cast<int>(k)) ? 0.0 : c / roots.theta[k];
  return out;
}

namespace detail {

class PathEngine {
 public:
  PathEngine(const NetworkModel& model, const CramerRoots& roots, RngStream rng,
             const SamplerOptions& opt)
      : model_(model), rng_(std::move(rng)), opt_(opt), K_(model.stations()) {
    if (!(opt_.milestone_c > 0.0))
      raise(ErrorCode::InvalidArgument, "milestone constant must be positive");
    if (opt_.step_budget == 0) raise(ErrorCode::InvalidArgument, "step budget must be positive");
    theta_ = roots.theta;
    monotone_.resize(K_);
    for (int k = 0; k < K_; ++k) {
      monotone_[k] = roots.monotone(k);
      if (!monotone_[k]) active_.push_back(k);
    }
    // The mixture proposal needs sum_k exp(-theta_k gap_k) <= 1, so the gap
    // carries a log(#active) surcharge on top of the configured constant.
    const double c_eff =
        opt_.milestone_c + std::log(static_cast<double>(active_.empty() ? 1 : active_.size()));
    gap_.assign(K_, 0.0);
    for (int k : active_) gap_[k] = c_eff / theta_[k];
    barrier_.assign(K_, kInf);
    walk_.assign(K_, 0.0);  // row 0
  }

  void finalize_to(std::size_t n) {
    while (fin_rows_ <= n) round();
  }

  std::size_t finalized_rows() const { return fin_rows_; }
  std::uint64_t steps_used() const { return steps_; }

  double interarrival(std::size_t n) const { return inter_[n - 1]; }
  double requirement(std::size_t n, int k) const { return req_[(n - 1) * K_ + k]; }
  double walk(std::size_t n, int k) const { return walk_[n * K_ + k]; }
  double future_max(std::size_t n, int k) const { return fmax_[n * K_ + k]; }

 private:
  void bump_budget() {
    if (++steps_ > opt_.step_budget) {
      std::ostringstream os;
      os << "step budget of " << opt_.step_budget << " increments exhausted";
      raise(ErrorCode::BudgetExceeded, os.str());
    }
  }

  void push_row(double inter, const std::vector<double>& req) {
    inter_.push_back(inter);
    const std::size_t row = len_ + 1;
    walk_.resize((row + 1) * K_);
    for (int k = 0; k < K_; ++k) {
      req_.push_back(req[k]);
      walk_[row * K_ + k] =
          walk_[(row - 1) * K_ + k] + (req[k] / model_.rates[k] - inter);
    }
    len_ = row;
  }

  void push_nominal() {
    bump_budget();
    const double inter = model_.interarrival.sample(rng_);
    scratch_req_.resize(K_);
    for (int k = 0; k < K_; ++k) scratch_req_[k] = model_.service_req[k].sample(rng_);
    push_row(inter, scratch_req_);
  }

  void push_tilted(int comp) {
    bump_budget();
    auto pair = sample_tilted_pair(model_, comp, theta_[comp], rng_);
    push_row(pair.first, pair.second);
  }

  void rollback(std::size_t to_len) {
    assert(to_len <= len_);
    assert(fin_rows_ == 0 || to_len + 1 >= fin_rows_);
    len_ = to_len;
    inter_.resize(len_);
    req_.resize(len_ * K_);
    walk_.resize((len_ + 1) * K_);
  }

  bool violates_inside(std::size_t from_row, const std::vector<double>& levels) const {
    for (std::size_t row = from_row; row <= len_; ++row)
      for (int k : active_)
        if (walk(row, k) > levels[k]) return true;
    return false;
  }

  // Exact Bernoulli of "some active coordinate with a finite level ever
  // exceeds it in the future of the frontier", proposal drawn from the
  // exponential-tilt mixture and accepted with its likelihood ratio. On true
  // the realized climb (nominal law given the crossing) is left appended; on
  // false nothing is.
  bool record_break_check(const std::vector<double>& levels) {
    const std::size_t start = len_;
    scratch_w_.assign(K_, 0.0);
    double total_w = 0.0;
    for (int k : active_) {
      if (!(levels[k] < kInf)) continue;
      const double gap = levels[k] - walk(start, k);
      assert(gap >= 0.0);
      scratch_w_[k] = std::exp(-theta_[k] * gap);
      total_w += scratch_w_[k];
    }
    if (!(total_w > 0.0)) return false;
    if (total_w > 1.0 + 1e-9)
      throw std::logic_error("record-break mixture weight exceeds 1");
    int comp = -1;
    double u = rng_.uniform() * total_w;
    for (int k : active_) {
      if (scratch_w_[k] <= 0.0) continue;
      comp = k;
      if (u < scratch_w_[k]) break;
      u -= scratch_w_[k];
    }
    while (true) {
      push_tilted(comp);
      bool crossed = false;
      for (int k : active_) {
        if (levels[k] < kInf && walk(len_, k) > levels[k]) {
          crossed = true;
          break;
        }
      }
      if (crossed) break;
    }
    double denom = 0.0;
    for (int k : active_) {
      if (!(levels[k] < kInf)) continue;
      const double rise = walk(len_, k) - walk(start, k);
      const double gap = levels[k] - walk(start, k);
      denom += std::exp(theta_[k] * (rise - gap));
    }
    if (rng_.uniform() * denom < total_w) return true;
    rollback(start);
    return false;
  }

  // Exact Bernoulli of "no coordinate ever exceeds levels", tail taken
  // unconditioned. Pure: the frontier is restored before returning. The
  // nominal probe runs until every gap is at least gap_[k] wide (a directly
  // observed violation settles the coin early), then one record-break check
  // decides the remainder.
  bool tail_stays_below(const std::vector<double>& levels) {
    const std::size_t start = len_;
    while (true) {
      bool healthy = true;
      bool violated = false;
      for (int k : active_) {
        if (!(levels[k] < kInf)) continue;
        const double slack = levels[k] - walk(len_, k);
        if (slack < 0.0) {
          violated = true;
          break;
        }
        if (slack < gap_[k]) healthy = false;
      }
      if (violated) {
        rollback(start);
        return false;
      }
      if (healthy) break;
      push_nominal();
    }
    const bool crossed = record_break_check(levels);
    rollback(start);
    return !crossed;
  }

  // One certification pass at the frontier: either every active barrier drops
  // to (current walk + gap) at once, or one record-break climb is realized
  // and the barriers stay. Returns true when the path climbed.
  bool try_tighten() {
    scratch_cand_.assign(K_, kInf);
    for (int k : active_) scratch_cand_[k] = walk(len_, k) + gap_[k];
    const std::vector<double> cand = scratch_cand_;
    while (true) {
      const std::size_t save = len_;
      if (!record_break_check(cand)) {
        for (int k : active_) barrier_[k] = cand[k];
        return false;
      }
      if (violates_inside(save + 1, barrier_) || !tail_stays_below(barrier_)) {
        rollback(save);
        continue;
      }
      return true;
    }
  }

  // Advance the frontier by one conditioned nominal segment: rejected while
  // it violates a barrier, long enough that every certified coordinate drops
  // gap_[k] below its running maximum since the segment start, and accepted
  // only when the in-force certificate re-verifies beyond the endpoint.
  void advance_milestone() {
    while (true) {
      const std::size_t save = len_;
      runmax_.resize(K_);
      for (int k = 0; k < K_; ++k) runmax_[k] = walk(save, k);
      bool ok = true;
      while (true) {
        push_nominal();
        bool violated = false;
        bool milestone = true;
        for (int k : active_) {
          const double v = walk(len_, k);
          if (v > barrier_[k]) {
            violated = true;
            break;
          }
          if (v > runmax_[k]) runmax_[k] = v;
          if (runmax_[k] - v < gap_[k]) milestone = false;
        }
        if (violated) {
          ok = false;
          break;
        }
        if (milestone) break;
      }
      if (ok && tail_stays_below(barrier_)) return;
      rollback(save);
    }
  }

  void round() {
    if (!initialized_) {
      while (try_tighten()) {
      }
      initialized_ = true;
    } else {
      advance_milestone();
      try_tighten();
    }
    refinalize();
  }

  // A prefix index is final for coordinate k once max of R_k over
  // [index, frontier] reaches barrier_[k]; the certified tail can then never
  // change M_k there. Monotone coordinates impose no limit.
  void refinalize() {
    std::size_t fin = len_;
    for (int k : active_) {
      double m = -kInf;
      std::size_t i = len_ + 1;
      bool found = false;
      while (i > 0) {
        --i;
        const double v = walk(i, k);
        if (v > m) m = v;
        if (m >= barrier_[k]) {
          found = true;
          break;
        }
      }
      if (!found) return;
      if (i < fin) fin = i;
    }
    if (fin + 1 <= fin_rows_) return;
    fmax_.resize((fin + 1) * K_);
    for (int k = 0; k < K_; ++k) {
      double m = -kInf;
      std::size_t i = len_ + 1;
      while (i > fin_rows_) {
        --i;
        const double v = walk(i, k);
        if (v > m) m = v;
        if (i <= fin) fmax_[i * K_ + k] = m;
      }
    }
    fin_rows_ = fin + 1;
  }

  const NetworkModel model_;
  RngStream rng_;
  const SamplerOptions opt_;
  const int K_;

  std::vector<double> theta_, gap_;
  std::vector<char> monotone_;
  std::vector<int> active_;

  // revealed path; appends beyond a savepoint are tentative until the
  // enclosing move returns
  std::vector<double> inter_, req_, walk_;
  std::size_t len_ = 0;

  std::vector<double> barrier_;
  bool initialized_ = false;

  std::vector<double> fmax_;  // exact future maxima, rows [0, fin_rows_)
  std::size_t fin_rows_ = 0;

  std::uint64_t steps_ = 0;
  std::vector<double> scratch_req_, scratch_w_, scratch_cand_, runmax_;
};

}  // namespace detail

BackwardPath::BackwardPath() = default;
BackwardPath::BackwardPath(BackwardPath&&) noexcept = default;
BackwardPath& BackwardPath::operator=(BackwardPath&&) noexcept = default;
BackwardPath::~BackwardPath() = default;

std::size_t BackwardPath::horizon() const {
  if (engine_) return engine_->finalized_rows() - 1;
  return fixed_horizon_;
}

std::uint64_t BackwardPath::steps_used() const { return engine_ ? engine_->steps_used() : 0; }

double BackwardPath::interarrival(std::size_t n) const {
  return engine_ ? engine_->interarrival(n) : fixed_inter_[n - 1];
}

double BackwardPath::requirement(std::size_t n, int k) const {
  return engine_ ? engine_->requirement(n, k) : fixed_req_[(n - 1) * stations() + k];
}

double BackwardPath::service_time(std::size_t n, int k) const {
  return requirement(n, k) / rates_[k];
}

double BackwardPath::walk(std::size_t n, int k) const {
  return engine_ ? engine_->walk(n, k) : fixed_walk_[n * stations() + k];
}

double BackwardPath::future_max(std::size_t n, int k) const {
  return engine_ ? engine_->future_max(n, k) : fixed_max_[n * stations() + k];
}

double BackwardPath::waiting(std::size_t n, int k) const {
  return future_max(n, k) - walk(n, k);
}

double BackwardPath::arrival_clock(std::size_t n) const {
  ensure_clock(n);
  return clock_[n];
}

void BackwardPath::ensure_clock(std::size_t n) const {
  if (clock_.empty()) clock_.push_back(0.0);
  while (clock_.size() <= n) {
    const std::size_t m = clock_.size();
    clock_.push_back(m == 1 ? -eq_inter_ : clock_[m - 1] - interarrival(m));
  }
}

void BackwardPath::extend_to(std::size_t n) {
  if (n <= horizon()) return;
  if (!engine_) raise(ErrorCode::InvalidArgument, "fixed path cannot be extended");
  engine_->finalize_to(n);
  extended_ = true;
}

void BackwardPath::resolve_stopping() {
  for (std::size_t n = 1;; ++n) {
    engine_->finalize_to(n);
    ensure_clock(n);
    bool all_negative = true;
    for (int k = 0; k < stations(); ++k) {
      if (clock_[n] + waiting(n, k) + service_time(n, k) >= 0.0) {
        all_negative = false;
        break;
      }
    }
    if (all_negative) {
      stop_ = n;
      return;
    }
  }
}

BackwardPath BackwardPath::from_components(std::vector<double> rates, double eq_interarrival,
                                           std::vector<double> interarrivals,
                                           std::vector<double> requirements, std::size_t stop) {
  BackwardPath p;
  const int K = static_cast<int>(rates.size());
  const std::size_t steps = interarrivals.size();
  if (requirements.size() != steps * rates.size())
    raise(ErrorCode::InvalidArgument, "requirements must hold one vector per step");
  p.rates_ = std::move(rates);
  p.eq_inter_ = eq_interarrival;
  p.stop_ = stop;
  p.fixed_inter_ = std::move(interarrivals);
  p.fixed_req_ = std::move(requirements);
  p.fixed_horizon_ = steps;
  p.fixed_walk_.assign((steps + 1) * K, 0.0);
  for (std::size_t n = 1; n <= steps; ++n)
    for (int k = 0; k < K; ++k)
      p.fixed_walk_[n * K + k] =
          p.fixed_walk_[(n - 1) * K + k] +
          (p.fixed_req_[(n - 1) * K + k] / p.rates_[k] - p.fixed_inter_[n - 1]);
  p.fixed_max_.assign((steps + 1) * K, 0.0);
  for (int k = 0; k < K; ++k) {
    double m = -kInf;
    for (std::size_t i = steps + 1; i-- > 0;) {
      const double v = p.fixed_walk_[i * K + k];
      if (v > m) m = v;
      p.fixed_max_[i * K + k] = m;
    }
  }
  return p;
}

BackwardPath simulate_backward_path(const NetworkModel& model, const CramerRoots& roots,
                                    RngStream rng, const SamplerOptions& options) {
  BackwardPath p;
  p.rates_ = model.rates;
  p.eq_inter_ = model.interarrival.sample_equilibrium(rng);
  p.engine_ = std::make_unique<detail::PathEngine>(model, roots, std::move(rng), options);
  p.resolve_stopping();
  return p;
}

}  // namespace fjsim
