#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace fjsim {

namespace {

void check_mm_domain(double lambda, double mu) {
  if (!(lambda > 0.0) || !std::isfinite(lambda) || !(mu > 0.0) || !std::isfinite(mu))
    raise(ErrorCode::InvalidArgument, "rates must be positive and finite");
  if (!(lambda < mu)) {
    std::ostringstream os;
    os << "unstable: arrival rate " << lambda << " must be below service rate " << mu;
    raise(ErrorCode::UnstableStation, os.str());
  }
}

}  // namespace

double mm_forkjoin_mean_sojourn(double lambda, double mu) {
  check_mm_domain(lambda, mu);
  return (12.0 * mu - lambda) / (8.0 * mu * (mu - lambda));
}

double mm_forkjoin_mean_unsync(double lambda, double mu) {
  check_mm_domain(lambda, mu);
  return lambda * (4.0 * mu - lambda) / (4.0 * mu * (mu - lambda));
}

double mm_forkjoin_sojourn_derivative(double lambda, double mu) {
  check_mm_domain(lambda, mu);
  const double d = mu - lambda;
  return (2.0 * lambda * mu - lambda * lambda - 12.0 * mu * mu) / (8.0 * mu * mu * d * d);
}

namespace {

// One forward Lindley pass. The visitor sees, for each job n = 1..horizon,
// its arrival time, per-station completion offsets (waiting + service), and
// the sojourn.
template <typename Visit>
void forward_pass(const NetworkModel& model, std::uint64_t horizon, RngStream& rng, Visit visit) {
  const int K = model.stations();
  std::vector<double> wait(K, 0.0), prev_req(K, 0.0), done(K, 0.0);
  double clock = 0.0;
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    const double inter = model.interarrival.sample(rng);
    clock += inter;
    for (int k = 0; k < K; ++k) {
      if (n > 1) wait[k] = std::max(0.0, wait[k] + prev_req[k] / model.rates[k] - inter);
      prev_req[k] = model.service_req[k].sample(rng);
      done[k] = wait[k] + prev_req[k] / model.rates[k];
    }
    const double sojourn = *std::max_element(done.begin(), done.end());
    visit(n, clock, done, sojourn);
  }
}

double sd_of_means(const std::vector<double>& means) {
  const std::size_t b = means.size();
  if (b < 2) return 0.0;
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= static_cast<double>(b);
  double ss = 0.0;
  for (double m : means) ss += (m - mean) * (m - mean);
  return std::sqrt(ss / static_cast<double>(b - 1)) / std::sqrt(static_cast<double>(b));
}

// Spread interval [lo, hi) over equal-width slices of [t0, t1).
void deposit(std::vector<double>& slices, double lo, double hi, double t0, double t1) {
  lo = std::max(lo, t0);
  hi = std::min(hi, t1);
  if (!(hi > lo)) return;
  const int b = static_cast<int>(slices.size());
  const double width = (t1 - t0) / b;
  int i = std::min(b - 1, static_cast<int>((lo - t0) / width));
  double cursor = lo;
  while (cursor < hi && i < b) {
    const double edge = t0 + width * (i + 1);
    const double stop = std::min(hi, edge);
    slices[i] += stop - cursor;
    cursor = stop;
    ++i;
  }
}

}  // namespace

BurnInEstimate burn_in_estimate(const NetworkModel& model, std::uint64_t warmup,
                                std::uint64_t horizon, RngStream rng, int batches) {
  validate(model);
  if (horizon <= warmup) raise(ErrorCode::InvalidArgument, "horizon must exceed warmup");
  if (batches < 2) raise(ErrorCode::InvalidArgument, "need at least two batches");
  const int K = model.stations();
  const std::uint64_t jobs = horizon - warmup;
  if (jobs < static_cast<std::uint64_t>(batches))
    raise(ErrorCode::InvalidArgument, "need at least one job per batch");

  // Pass 1: sojourn job-average and the observation window edges.
  RngStream replay = rng;
  double t0 = 0.0, t1 = 0.0;
  double s_sum = 0.0;
  std::vector<double> s_batch(batches, 0.0);
  std::vector<std::uint64_t> s_count(batches, 0);
  forward_pass(model, horizon, rng,
               [&](std::uint64_t n, double clock, const std::vector<double>&, double sojourn) {
                 if (n == warmup) t0 = clock;
                 if (n == horizon) t1 = clock;
                 if (n <= warmup) return;
                 const std::uint64_t j = n - warmup - 1;
                 const int b = static_cast<int>(j * static_cast<std::uint64_t>(batches) / jobs);
                 s_sum += sojourn;
                 s_batch[b] += sojourn;
                 ++s_count[b];
               });

  BurnInEstimate est;
  est.sojourn = s_sum / static_cast<double>(jobs);
  for (int b = 0; b < batches; ++b)
    s_batch[b] = s_count[b] ? s_batch[b] / static_cast<double>(s_count[b]) : 0.0;
  est.sojourn_se = sd_of_means(s_batch);

  if (!(t1 > t0)) raise(ErrorCode::InvalidArgument, "observation window is empty");

  // Pass 2: same stream replayed, occupancy intervals sliced over [t0, t1].
  std::vector<std::vector<double>> q_slices(K, std::vector<double>(batches, 0.0));
  std::vector<std::vector<double>> d_slices(K, std::vector<double>(batches, 0.0));
  forward_pass(model, horizon, replay,
               [&](std::uint64_t, double clock, const std::vector<double>& done, double sojourn) {
                 for (int k = 0; k < K; ++k) {
                   deposit(q_slices[k], clock, clock + done[k], t0, t1);
                   deposit(d_slices[k], clock + done[k], clock + sojourn, t0, t1);
                 }
               });

  const double span = t1 - t0;
  const double width = span / batches;
  est.queue.resize(K);
  est.queue_se.resize(K);
  est.unsync.resize(K);
  est.unsync_se.resize(K);
  std::vector<double> total_slices(batches, 0.0);
  std::vector<double> means(batches);
  for (int k = 0; k < K; ++k) {
    double q = 0.0, d = 0.0;
    for (int b = 0; b < batches; ++b) {
      q += q_slices[k][b];
      d += d_slices[k][b];
      total_slices[b] += d_slices[k][b];
    }
    est.queue[k] = q / span;
    est.unsync[k] = d / span;
    est.unsync_total += est.unsync[k];
    for (int b = 0; b < batches; ++b) means[b] = q_slices[k][b] / width;
    est.queue_se[k] = sd_of_means(means);
    for (int b = 0; b < batches; ++b) means[b] = d_slices[k][b] / width;
    est.unsync_se[k] = sd_of_means(means);
  }
  for (int b = 0; b < batches; ++b) means[b] = total_slices[b] / width;
  est.unsync_total_se = sd_of_means(means);
  return est;
}

FdEstimate finite_difference_gradient(const NetworkModel& model, int station, double step,
                                      int reps, std::uint64_t seed, std::uint64_t warmup,
                                      std::uint64_t horizon) {
  validate(model);
  if (station < 0 || station >= model.stations())
    raise(ErrorCode::InvalidArgument, "station index out of range");
  if (!(step > 0.0)) raise(ErrorCode::InvalidArgument, "step must be positive");
  if (reps < 2) raise(ErrorCode::InvalidArgument, "need at least two replications");

  NetworkModel up = model, down = model;
  up.rates[station] += step;
  down.rates[station] -= step;
  validate(up);
  validate(down);

  std::vector<double> diffs(reps);
  for (int j = 0; j < reps; ++j) {
    const std::uint64_t s = RngStream::derive_seed(seed, static_cast<std::uint64_t>(j));
    const double hi = burn_in_estimate(up, warmup, horizon, RngStream(s)).sojourn;
    const double lo = burn_in_estimate(down, warmup, horizon, RngStream(s)).sojourn;
    diffs[j] = (hi - lo) / (2.0 * step);
  }
  FdEstimate out;
  for (double d : diffs) out.mean += d;
  out.mean /= reps;
  double ss = 0.0;
  for (double d : diffs) ss += (d - out.mean) * (d - out.mean);
  out.se = std::sqrt(ss / (reps - 1)) / std::sqrt(static_cast<double>(reps));
  return out;
}

}  // namespace fjsim
