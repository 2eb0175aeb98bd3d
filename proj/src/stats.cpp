#include "stats.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "errors.hpp"

namespace fjsim {

QuantityStat ci(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) raise(ErrorCode::InsufficientSamples, "confidence interval needs at least two values");
  QuantityStat st;
  for (double v : values) st.mean += v;
  st.mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - st.mean) * (v - st.mean);
  st.sd = std::sqrt(ss / static_cast<double>(n - 1));
  st.half_width = 1.96 * st.sd / std::sqrt(static_cast<double>(n));
  return st;
}

double sample_quantity(const StationarySample& s, Quantity q, int station) {
  const int K = static_cast<int>(s.waiting0.size());
  switch (q) {
    case Quantity::Sojourn:
      return s.sojourn;
    case Quantity::UnsyncTotal:
      return static_cast<double>(s.unsync_total);
    case Quantity::GradientSum: {
      double t = 0.0;
      for (double g : s.gradient) t += g;
      return t;
    }
    default:
      break;
  }
  if (station < 0 || station >= K)
    raise(ErrorCode::InvalidArgument, "station index out of range");
  switch (q) {
    case Quantity::Queue:
      return static_cast<double>(s.queue[station]);
    case Quantity::Unsync:
      return static_cast<double>(s.unsync[station]);
    case Quantity::Gradient:
      return s.gradient[station];
    default:
      raise(ErrorCode::InvalidArgument, "unknown quantity");
  }
}

namespace {

nlohmann::json stat_json(const QuantityStat& st) {
  return {{"mean", st.mean}, {"sd", st.sd}, {"half_width", st.half_width}};
}

}  // namespace

std::string EstimateReport::to_json(bool include_timing) const {
  nlohmann::json j;
  j["stations"] = stations;
  j["reps"] = reps;
  j["seed"] = seed;
  if (include_timing) j["seconds"] = seconds;
  j["sojourn"] = stat_json(sojourn);
  j["unsync_total"] = stat_json(unsync_total);
  j["gradient_sum"] = stat_json(gradient_sum);
  j["queue"] = nlohmann::json::array();
  j["unsync"] = nlohmann::json::array();
  j["gradient"] = nlohmann::json::array();
  for (const auto& st : queue) j["queue"].push_back(stat_json(st));
  for (const auto& st : unsync) j["unsync"].push_back(stat_json(st));
  for (const auto& st : gradient) j["gradient"].push_back(stat_json(st));
  j["diagnostics"] = {{"mean_stop_index", mean_stop_index},
                      {"max_stop_index", max_stop_index},
                      {"mean_steps", mean_steps},
                      {"argmax_ties", argmax_ties},
                      {"horizon_extensions", horizon_extensions}};
  return j.dump(2);
}

EstimateReport run_experiment(const NetworkModel& model, int reps, std::uint64_t seed,
                              const SamplerOptions& options, int threads) {
  validate(model);
  if (reps < 2) raise(ErrorCode::InsufficientSamples, "need at least two replications");
  if (threads < 1) raise(ErrorCode::InvalidArgument, "thread count must be positive");
  const auto start = std::chrono::steady_clock::now();
  const CramerRoots roots = solve_cramer_roots(model);
  const int K = model.stations();

  std::vector<StationarySample> samples(reps);
  std::atomic<int> next{0};
  std::mutex fail_mutex;
  int fail_rep = -1;
  std::exception_ptr fail;

  auto worker = [&]() {
    while (true) {
      const int rep = next.fetch_add(1);
      if (rep >= reps) return;
      try {
        samples[rep] = draw_stationary_sample(
            model, roots, RngStream(RngStream::derive_seed(seed, static_cast<std::uint64_t>(rep))),
            options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fail_mutex);
        if (fail_rep < 0 || rep < fail_rep) {
          fail_rep = rep;
          fail = std::current_exception();
        }
      }
    }
  };

  const int workers = std::min(threads, reps);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (fail) {
    try {
      std::rethrow_exception(fail);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "replication " << fail_rep << ": " << e.what();
      raise(e.code(), os.str());
    }
  }

  EstimateReport rep;
  rep.stations = K;
  rep.reps = reps;
  rep.seed = seed;
  rep.queue.resize(K);
  rep.unsync.resize(K);
  rep.gradient.resize(K);

  std::vector<double> vals(reps);
  auto reduce = [&](Quantity q, int station) {
    for (int i = 0; i < reps; ++i) vals[i] = sample_quantity(samples[i], q, station);
    return ci(vals);
  };
  rep.sojourn = reduce(Quantity::Sojourn, 0);
  rep.unsync_total = reduce(Quantity::UnsyncTotal, 0);
  rep.gradient_sum = reduce(Quantity::GradientSum, 0);
  for (int k = 0; k < K; ++k) {
    rep.queue[k] = reduce(Quantity::Queue, k);
    rep.unsync[k] = reduce(Quantity::Unsync, k);
    rep.gradient[k] = reduce(Quantity::Gradient, k);
  }
  for (int i = 0; i < reps; ++i) {
    const StationarySample& s = samples[i];
    rep.mean_stop_index += static_cast<double>(s.stop_index);
    rep.max_stop_index = std::max<std::uint64_t>(rep.max_stop_index, s.stop_index);
    rep.mean_steps += static_cast<double>(s.steps);
    rep.argmax_ties += s.argmax_tied ? 1 : 0;
    rep.horizon_extensions += s.tau_horizon_extended ? 1 : 0;
  }
  rep.mean_stop_index /= reps;
  rep.mean_steps /= reps;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

CoverageResult coverage_experiment(const NetworkModel& model, Quantity quantity, int station,
                                   double truth, int n_cis, int reps_per_ci, std::uint64_t seed,
                                   const SamplerOptions& options, int threads) {
  if (n_cis < 1) raise(ErrorCode::InvalidArgument, "need at least one confidence interval");
  CoverageResult out;
  out.total = n_cis;
  for (int i = 0; i < n_cis; ++i) {
    const std::uint64_t run_seed = RngStream::derive_seed(seed, static_cast<std::uint64_t>(i));
    const EstimateReport rep = run_experiment(model, reps_per_ci, run_seed, options, threads);
    if ((quantity == Quantity::Queue || quantity == Quantity::Unsync ||
         quantity == Quantity::Gradient) &&
        (station < 0 || station >= rep.stations))
      raise(ErrorCode::InvalidArgument, "station index out of range");
    QuantityStat st;
    switch (quantity) {
      case Quantity::Sojourn:
        st = rep.sojourn;
        break;
      case Quantity::UnsyncTotal:
        st = rep.unsync_total;
        break;
      case Quantity::GradientSum:
        st = rep.gradient_sum;
        break;
      case Quantity::Queue:
        st = rep.queue.at(station);
        break;
      case Quantity::Unsync:
        st = rep.unsync.at(station);
        break;
      case Quantity::Gradient:
        st = rep.gradient.at(station);
        break;
    }
    if (std::abs(truth - st.mean) <= st.half_width) ++out.covered;
  }
  return out;
}

}  // namespace fjsim
