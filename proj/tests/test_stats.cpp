#include <cmath>
#include <doctest.h>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "oracle.hpp"
#include "stats.hpp"
#include "test_helpers.hpp"

using fjsim::ci;
using fjsim::coverage_experiment;
using fjsim::ErrorCode;
using fjsim::EstimateReport;
using fjsim::NetworkModel;
using fjsim::Quantity;
using fjsim::QuantityStat;
using fjsim::run_experiment;
using fjsim::sample_quantity;
using fjsim::StationarySample;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const fjsim::Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("confidence interval arithmetic on a two-point batch") {
  const QuantityStat st = ci({0.0, 2.0});
  CHECK(st.mean == 1.0);
  CHECK(st.sd == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  // 1.96 * sd / sqrt(2) with sd == sqrt(2); rounding happens twice, so the
  // result is only pinned to the last bit
  CHECK(st.half_width == doctest::Approx(1.96).epsilon(1e-15));
  CHECK(ci({3.5, 3.5, 3.5}).half_width == 0.0);
  CHECK(code_of([] { ci({}); }) == ErrorCode::InsufficientSamples);
  CHECK(code_of([] { ci({1.0}); }) == ErrorCode::InsufficientSamples);
}

TEST_CASE("half-width matches the normal theory value on synthetic data") {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> vals(10000);
  for (double& v : vals) v = normal(gen);
  const QuantityStat st = ci(vals);
  CHECK(st.half_width == doctest::Approx(1.96 / 100.0).epsilon(0.05));
  CHECK(std::abs(st.mean) < 3.0 / 100.0);
}

TEST_CASE("quantity extraction addresses the right fields") {
  StationarySample s;
  s.sojourn = 7.5;
  s.waiting0 = {0.5, 1.5};
  s.unsync_total = 4;
  s.queue = {2, 9};
  s.unsync = {1, 3};
  s.gradient = {-0.25, -1.5};
  CHECK(sample_quantity(s, Quantity::Sojourn) == 7.5);
  CHECK(sample_quantity(s, Quantity::UnsyncTotal) == 4.0);
  CHECK(sample_quantity(s, Quantity::Queue, 1) == 9.0);
  CHECK(sample_quantity(s, Quantity::Unsync, 0) == 1.0);
  CHECK(sample_quantity(s, Quantity::Gradient, 1) == -1.5);
  CHECK(sample_quantity(s, Quantity::GradientSum) == -1.75);
  CHECK(code_of([&] { sample_quantity(s, Quantity::Queue, 2); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { sample_quantity(s, Quantity::Gradient, -1); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("experiment results are invariant to the thread count") {
  const NetworkModel m = testutil::mm2_model(1.4);
  const EstimateReport a = run_experiment(m, 300, 42, {}, 1);
  const EstimateReport b = run_experiment(m, 300, 42, {}, 4);
  CHECK(a.to_json(false) == b.to_json(false));
  // and reproducible run to run
  const EstimateReport c = run_experiment(m, 300, 42, {}, 4);
  CHECK(b.to_json(false) == c.to_json(false));
  // a different seed moves the numbers
  const EstimateReport d = run_experiment(m, 300, 43, {}, 1);
  CHECK(a.to_json(false) != d.to_json(false));
}

TEST_CASE("experiment report carries sane content and diagnostics") {
  const NetworkModel m = testutil::mm2_model(1.4);
  const EstimateReport r = run_experiment(m, 500, 7, {}, 2);
  CHECK(r.stations == 2);
  CHECK(r.reps == 500);
  CHECK(r.seed == 7);
  CHECK(r.seconds > 0.0);
  CHECK(r.sojourn.mean > 0.0);
  CHECK(r.sojourn.half_width > 0.0);
  CHECK(r.queue.size() == 2);
  CHECK(r.gradient.size() == 2);
  CHECK(r.gradient_sum.mean < 0.0);
  CHECK(r.mean_stop_index >= 1.0);
  CHECK(static_cast<double>(r.max_stop_index) >= r.mean_stop_index);
  CHECK(r.mean_steps > 0.0);
  const std::string with_t = r.to_json(true);
  const std::string without_t = r.to_json(false);
  CHECK(with_t.find("seconds") != std::string::npos);
  CHECK(without_t.find("seconds") == std::string::npos);
  CHECK(without_t.find("sojourn") != std::string::npos);
}

TEST_CASE("experiment argument validation") {
  const NetworkModel m = testutil::mm2_model(1.4);
  CHECK(code_of([&] { run_experiment(m, 1, 1); }) == ErrorCode::InsufficientSamples);
  CHECK(code_of([&] { run_experiment(m, 100, 1, {}, 0); }) == ErrorCode::InvalidArgument);
  NetworkModel bad = m;
  bad.rates[0] = 1.0;
  CHECK(code_of([&] { run_experiment(bad, 100, 1); }) == ErrorCode::UnstableStation);
}

TEST_CASE("budget failures name the smallest failing replication") {
  const NetworkModel m = testutil::mm2_model(1.4);
  fjsim::SamplerOptions opt;
  opt.step_budget = 1;  // nothing can finish
  for (int threads : {1, 4}) {
    try {
      run_experiment(m, 64, 5, opt, threads);
      FAIL("expected a budget error");
    } catch (const fjsim::Error& e) {
      CHECK(e.code() == ErrorCode::BudgetExceeded);
      CHECK(std::string(e.what()).find("replication 0") != std::string::npos);
    }
  }
}

TEST_CASE("interval coverage sits near the nominal level") {
  const NetworkModel m = testutil::mm2_model(1.4);
  const double truth = fjsim::mm_forkjoin_mean_sojourn(1.0, 1.4);
  const fjsim::CoverageResult cov =
      coverage_experiment(m, Quantity::Sojourn, 0, truth, 100, 500, 2026, {}, 4);
  CHECK(cov.total == 100);
  // binomial(100, 0.95) three-sigma band, widened for CLT error at n = 500
  CHECK(cov.covered >= 87);
  CHECK(cov.covered <= 100);
  // a wrong truth far outside the intervals covers almost never
  const fjsim::CoverageResult miss =
      coverage_experiment(m, Quantity::Sojourn, 0, truth * 2.0, 40, 500, 2026, {}, 4);
  CHECK(miss.covered <= 2);
}

TEST_CASE("coverage validates its inputs") {
  const NetworkModel m = testutil::mm2_model(1.4);
  CHECK(code_of([&] {
          coverage_experiment(m, Quantity::Queue, 7, 1.0, 10, 100, 1);
        }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] {
          coverage_experiment(m, Quantity::Sojourn, 0, 1.0, 0, 100, 1);
        }) == ErrorCode::InvalidArgument);
}
