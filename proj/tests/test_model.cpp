#include <cmath>
#include <doctest.h>
#include <limits>
#include <string>

#include "errors.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "test_helpers.hpp"

using fjsim::DistributionSpec;
using fjsim::Error;
using fjsim::ErrorCode;
using fjsim::NetworkModel;
using fjsim::RngStream;

namespace {

ErrorCode code_of(const std::function<void()>& fn, std::string* msg = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (msg) *msg = e.what();
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

// Root of psi via plain bisection on a fixed interval, independent of the
// production doubling search.
double bisect_root(const NetworkModel& m, int k, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (fjsim::cramer_psi(m, k, mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("validate accepts the bundled reference models") {
  CHECK_NOTHROW(fjsim::validate(testutil::mm2_model(1.4)));
  CHECK_NOTHROW(fjsim::validate(testutil::graded10_model()));
  CHECK_NOTHROW(fjsim::validate(testutil::dd_model()));
  CHECK_NOTHROW(fjsim::validate(testutil::hetero3_model()));
  CHECK_NOTHROW(fjsim::validate(testutil::monotone2_model()));
}

TEST_CASE("validate rejects structural defects") {
  NetworkModel empty;
  empty.interarrival = DistributionSpec::exponential(1.0);
  CHECK(code_of([&] { fjsim::validate(empty); }) == ErrorCode::InvalidArgument);

  NetworkModel mismatched = testutil::mm2_model(1.4);
  mismatched.rates.pop_back();
  CHECK(code_of([&] { fjsim::validate(mismatched); }) == ErrorCode::InvalidArgument);

  NetworkModel bad_rate = testutil::mm2_model(1.4);
  bad_rate.rates[1] = 0.0;
  std::string msg;
  CHECK(code_of([&] { fjsim::validate(bad_rate); }, &msg) == ErrorCode::InvalidArgument);
  CHECK(msg.find("station 2") != std::string::npos);
}

TEST_CASE("validate names the unstable station") {
  NetworkModel m = testutil::mm2_model(1.4);
  m.rates[1] = 0.9;  // utilization 1/0.9 > 1
  std::string msg;
  CHECK(code_of([&] { fjsim::validate(m); }, &msg) == ErrorCode::UnstableStation);
  CHECK(msg.find("station 2") != std::string::npos);
  CHECK(msg.find("utilization") != std::string::npos);

  m.rates[1] = 1.0;  // utilization exactly 1 is also out
  CHECK(code_of([&] { fjsim::validate(m); }) == ErrorCode::UnstableStation);
}

TEST_CASE("utilization is requirement mean over rate times arrival rate") {
  const NetworkModel m = testutil::hetero3_model();
  // interarrival erlang(2, 2) has mean 1
  CHECK(m.utilization(0) == doctest::Approx(1.0 / 1.3));
  CHECK(m.utilization(1) == doctest::Approx(0.55));
  CHECK(m.utilization(2) == doctest::Approx((0.4 / 2.0 + 0.6 / 0.8) / 1.2));
}

TEST_CASE("increment supremum splits coordinates into drifting and climbing") {
  CHECK(fjsim::increment_sup(testutil::dd_model(), 0) == -1.0);
  CHECK(fjsim::increment_sup(testutil::mm2_model(1.4), 0) ==
        std::numeric_limits<double>::infinity());
  const NetworkModel m = testutil::monotone2_model();
  CHECK(fjsim::increment_sup(m, 0) == doctest::Approx(-0.1));
  CHECK(fjsim::increment_sup(m, 1) == std::numeric_limits<double>::infinity());
}

TEST_CASE("tilting root of the symmetric exponential network is mu minus lambda") {
  // psi(theta) = log(mu / (mu - theta)) + log(1 / (1 + theta)) vanishes at
  // theta = mu - 1.
  for (double mu : {1.8, 1.4, 1.1, 1.06}) {
    CAPTURE(mu);
    const NetworkModel m = testutil::mm2_model(mu);
    const fjsim::CramerRoots roots = fjsim::solve_cramer_roots(m);
    for (int k = 0; k < 2; ++k) {
      CHECK(!roots.monotone(k));
      CHECK(roots.theta[k] == doctest::Approx(mu - 1.0).epsilon(1e-9));
      CHECK(std::abs(std::exp(roots.residual[k]) - 1.0) <= 1e-10);
      CHECK(fjsim::cramer_psi(m, k, roots.theta[k] / 2.0) < 0.0);
    }
  }
}

TEST_CASE("tilting root of a deterministic-arrival station matches bisection") {
  NetworkModel m;
  m.interarrival = DistributionSpec::deterministic(2.0);
  m.service_req = {DistributionSpec::exponential(1.0)};
  m.rates = {1.0};
  fjsim::validate(m);
  const double root = fjsim::cramer_root(m, 0);
  // -log(1 - theta) = 2 theta has its positive solution near 0.7968
  const double oracle = bisect_root(m, 0, 1e-9, 1.0 - 1e-9);
  CHECK(root == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(root == doctest::Approx(0.7968).epsilon(2e-4));
}

TEST_CASE("tilting roots across heterogeneous families match bisection") {
  const NetworkModel m = testutil::hetero3_model();
  const fjsim::CramerRoots roots = fjsim::solve_cramer_roots(m);
  for (int k = 0; k < 3; ++k) {
    CAPTURE(k);
    CHECK(!roots.monotone(k));
    const double cap = m.rates[k] * m.service_req[k].mgf_domain_sup();
    const double hi = std::isfinite(cap) ? 0.999 * cap : 64.0;
    CHECK(roots.theta[k] == doctest::Approx(bisect_root(m, k, 1e-9, hi)).epsilon(1e-8));
    CHECK(std::abs(std::exp(roots.residual[k]) - 1.0) <= 1e-10);
    CHECK(fjsim::cramer_psi(m, k, roots.theta[k] / 2.0) < 0.0);
  }
}

TEST_CASE("coordinates that never climb have no root and are flagged monotone") {
  CHECK(code_of([] { fjsim::cramer_root(testutil::dd_model(), 0); }) ==
        ErrorCode::RootNotBracketed);
  const fjsim::CramerRoots dd = fjsim::solve_cramer_roots(testutil::dd_model());
  CHECK(dd.monotone(0));
  CHECK(dd.theta[0] == std::numeric_limits<double>::infinity());

  const fjsim::CramerRoots mixed = fjsim::solve_cramer_roots(testutil::monotone2_model());
  CHECK(mixed.monotone(0));
  CHECK(!mixed.monotone(1));
  CHECK(std::isfinite(mixed.theta[1]));
}

TEST_CASE("tilted pair gives the chosen coordinate positive mean drift") {
  const NetworkModel m = testutil::hetero3_model();
  const fjsim::CramerRoots roots = fjsim::solve_cramer_roots(m);
  for (int k = 0; k < 3; ++k) {
    CAPTURE(k);
    RngStream rng(1000 + k);
    double drift = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const auto [inter, req] = fjsim::sample_tilted_pair(m, k, roots.theta[k], rng);
      drift += req[k] / m.rates[k] - inter;
    }
    CHECK(drift / n > 0.0);
  }
}

TEST_CASE("model json round trip covers every family") {
  const std::string text = R"({
    "arrival": {"family": "erlang", "shape": 2, "rate": 2.0},
    "stations": [
      {"service": {"family": "exponential", "rate": 1.0}, "rate": 1.3},
      {"service": {"family": "uniform", "lo": 0.2, "hi": 0.9}, "rate": 1.0},
      {"service": {"family": "hyperexponential", "weights": [0.4, 0.6], "rates": [2.0, 0.8]},
       "rate": 1.2},
      {"service": {"family": "deterministic", "value": 0.4}, "rate": 1.0}
    ],
    "reps": 50, "seed": 7
  })";
  const NetworkModel m = fjsim::model_from_json(text);  // extra keys ignored
  CHECK(m.stations() == 4);
  CHECK(m.interarrival.family == fjsim::Family::Erlang);
  CHECK(m.service_req[1].family == fjsim::Family::Uniform);
  CHECK(m.service_req[2].family == fjsim::Family::Hyperexponential);
  CHECK(m.service_req[3].family == fjsim::Family::Deterministic);
  CHECK(m.rates[2] == 1.2);
  CHECK_NOTHROW(fjsim::validate(m));
}

TEST_CASE("model json rejects malformed input with parse errors") {
  CHECK(code_of([] { fjsim::model_from_json("not json at all"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { fjsim::model_from_json("[1,2,3]"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { fjsim::model_from_json(R"({"arrival": {"family": "exponential",
    "rate": 1.0}})"); }) == ErrorCode::ParseError);  // stations missing
  CHECK(code_of([] { fjsim::model_from_json(R"({"arrival": {"family": "exponential",
    "rate": 1.0}, "stations": []})"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { fjsim::model_from_json(R"({"arrival": {"family": "weibull",
    "rate": 1.0}, "stations": [{"service": {"family": "exponential", "rate": 1.0},
    "rate": 2.0}]})"); }) == ErrorCode::ParseError);  // unknown family
  CHECK(code_of([] { fjsim::model_from_json(R"({"arrival": {"family": "exponential"},
    "stations": [{"service": {"family": "exponential", "rate": 1.0}, "rate": 2.0}]})"); }) ==
        ErrorCode::ParseError);  // rate missing
  // Structurally valid JSON carrying an impossible parameter fails the
  // distribution's own validation instead.
  CHECK(code_of([] { fjsim::model_from_json(R"({"arrival": {"family": "exponential",
    "rate": -1.0}, "stations": [{"service": {"family": "exponential", "rate": 1.0},
    "rate": 2.0}]})"); }) == ErrorCode::InvalidArgument);
}
