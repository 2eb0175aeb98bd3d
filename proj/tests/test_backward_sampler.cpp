#include <cmath>
#include <doctest.h>
#include <limits>
#include <vector>

#include "backward_sampler.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "test_helpers.hpp"

using fjsim::BackwardPath;
using fjsim::CramerRoots;
using fjsim::Error;
using fjsim::ErrorCode;
using fjsim::NetworkModel;
using fjsim::RngStream;
using fjsim::SamplerOptions;
using fjsim::simulate_backward_path;

namespace {

BackwardPath draw(const NetworkModel& m, std::uint64_t seed, SamplerOptions opt = {}) {
  return simulate_backward_path(m, fjsim::solve_cramer_roots(m), RngStream(seed), opt);
}

}  // namespace

TEST_CASE("milestone levels are c over theta, zero for monotone coordinates") {
  CramerRoots roots;
  roots.theta = {0.8, std::numeric_limits<double>::infinity()};
  roots.residual = {0.0, 0.0};
  const auto levels = fjsim::milestone_level(roots, 2.0);
  CHECK(levels[0] == doctest::Approx(2.5));
  CHECK(levels[1] == 0.0);
  CHECK_THROWS_AS(fjsim::milestone_level(roots, 0.0), Error);
}

TEST_CASE("deterministic always-empty model: zero waiting and a one-or-two stop") {
  const NetworkModel m = testutil::dd_model();
  int stop_one = 0;
  const int reps = 2000;
  for (int i = 0; i < reps; ++i) {
    BackwardPath p = draw(m, 100 + i);
    // service 1, interarrival 2: the walk only descends
    for (std::size_t n = 0; n <= p.horizon(); ++n) {
      REQUIRE(p.waiting(n, 0) == 0.0);
      REQUIRE(p.future_max(n, 0) == p.walk(n, 0));
    }
    // equilibrium interarrival is uniform on (0, 2); the first lookback job
    // is already gone iff it exceeds the unit service time
    const double eq = p.eq_interarrival();
    REQUIRE(eq > 0.0);
    REQUIRE(eq < 2.0);
    REQUIRE(p.stopping_index() == (eq > 1.0 ? 1u : 2u));
    if (p.stopping_index() == 1) ++stop_one;
  }
  // P(stop at 1) = P(U(0,2) > 1) = 1/2
  const double freq = static_cast<double>(stop_one) / reps;
  CHECK(std::abs(freq - 0.5) < 4.0 * 0.5 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("path recursions are exact in floating point") {
  for (const NetworkModel& m :
       {testutil::mm2_model(1.4), testutil::hetero3_model(), testutil::monotone2_model()}) {
    CAPTURE(m.stations());
    for (int rep = 0; rep < 50; ++rep) {
      BackwardPath p = draw(m, 7000 + rep);
      const std::size_t h = p.horizon();
      REQUIRE(h >= p.stopping_index());
      for (int k = 0; k < m.stations(); ++k) {
        REQUIRE(p.walk(0, k) == 0.0);
        for (std::size_t n = 1; n <= h; ++n) {
          // the defining one-step updates, compared bit for bit
          REQUIRE(p.walk(n, k) ==
                  p.walk(n - 1, k) + (p.requirement(n, k) / m.rates[k] - p.interarrival(n)));
          if (n < h) REQUIRE(p.future_max(n, k) == std::max(p.walk(n, k), p.future_max(n + 1, k)));
          REQUIRE(p.future_max(n, k) >= p.walk(n, k));
          REQUIRE(p.waiting(n, k) >= 0.0);
        }
      }
    }
  }
}

TEST_CASE("waiting times satisfy the one-step recursion within rounding") {
  const NetworkModel m = testutil::mm2_model(1.4);
  for (int rep = 0; rep < 200; ++rep) {
    BackwardPath p = draw(m, 9000 + rep);
    for (int k = 0; k < 2; ++k) {
      for (std::size_t n = 0; n + 1 <= p.horizon(); ++n) {
        const double lhs = p.waiting(n, k);
        const double rhs = std::max(
            0.0, p.waiting(n + 1, k) + p.service_time(n + 1, k) - p.interarrival(n + 1));
        REQUIRE(std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(lhs)));
      }
    }
  }
}

TEST_CASE("stopping index is the first time every coordinate is already gone") {
  const NetworkModel m = testutil::mm2_model(1.4);
  for (int rep = 0; rep < 500; ++rep) {
    BackwardPath p = draw(m, 11000 + rep);
    const std::size_t N = p.stopping_index();
    REQUIRE(N >= 1);
    for (int k = 0; k < 2; ++k)
      REQUIRE(p.arrival_clock(N) + p.waiting(N, k) + p.service_time(N, k) < 0.0);
    // strictly earlier indices each have some coordinate still in play
    for (std::size_t n = 1; n < N; ++n) {
      bool some_positive = false;
      for (int k = 0; k < 2; ++k)
        if (p.arrival_clock(n) + p.waiting(n, k) + p.service_time(n, k) >= 0.0)
          some_positive = true;
      REQUIRE(some_positive);
    }
  }
}

TEST_CASE("arrival clock telescopes the interarrival times") {
  BackwardPath p = draw(testutil::mm2_model(1.4), 123);
  CHECK(p.arrival_clock(0) == 0.0);
  CHECK(p.arrival_clock(1) == -p.eq_interarrival());
  double acc = -p.eq_interarrival();
  for (std::size_t n = 2; n <= p.stopping_index(); ++n) {
    acc -= p.interarrival(n);
    CHECK(p.arrival_clock(n) == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("single-queue waiting time has the right mass at zero") {
  // Stationary waiting of the exponential single queue: P(W = 0) = 1 - rho.
  const NetworkModel m = testutil::mm1_model(1.0, 1.4);
  const CramerRoots roots = fjsim::solve_cramer_roots(m);
  const int n = 10000;
  int at_zero = 0;
  for (int i = 0; i < n; ++i) {
    BackwardPath p = simulate_backward_path(m, roots, RngStream::substream(51, i));
    if (p.waiting(0, 0) == 0.0) ++at_zero;
  }
  const double want = 1.0 - 1.0 / 1.4;
  const double freq = static_cast<double>(at_zero) / n;
  const double se = std::sqrt(want * (1.0 - want) / n);
  CHECK(std::abs(freq - want) < 3.0 * se);
}

TEST_CASE("waiting three arrivals into the past has the time-zero law") {
  // Stationarity of the construction: W(-3) and W(0) drawn from disjoint
  // seed ranges must be indistinguishable.
  const NetworkModel m = testutil::mm2_model(1.4);
  const CramerRoots roots = fjsim::solve_cramer_roots(m);
  const int n = 8000;
  std::vector<double> at_zero(n), at_three(n);
  for (int i = 0; i < n; ++i) {
    BackwardPath p = simulate_backward_path(m, roots, RngStream::substream(333, i));
    at_zero[i] = p.waiting(0, 0);
  }
  for (int i = 0; i < n; ++i) {
    BackwardPath p = simulate_backward_path(m, roots, RngStream::substream(334, n + i));
    p.extend_to(3);
    at_three[i] = p.waiting(3, 0);
  }
  const double d = testutil::ks_distance_two_sample(at_zero, at_three);
  CHECK(d < testutil::ks_critical_two_sample(n, n));
}

TEST_CASE("coordinates that cannot climb keep zero waiting inside a mixed network") {
  const NetworkModel m = testutil::monotone2_model();
  for (int rep = 0; rep < 200; ++rep) {
    BackwardPath p = draw(m, 15000 + rep);
    bool positive_seen = false;
    for (std::size_t n = 0; n <= p.horizon(); ++n) {
      REQUIRE(p.waiting(n, 0) == 0.0);
      REQUIRE(p.future_max(n, 0) == p.walk(n, 0));
      if (p.waiting(n, 1) > 0.0) positive_seen = true;
      (void)positive_seen;
    }
  }
}

TEST_CASE("same seed reproduces the same path bit for bit") {
  const NetworkModel m = testutil::hetero3_model();
  BackwardPath a = draw(m, 777);
  BackwardPath b = draw(m, 777);
  REQUIRE(a.stopping_index() == b.stopping_index());
  REQUIRE(a.horizon() == b.horizon());
  REQUIRE(a.steps_used() == b.steps_used());
  REQUIRE(a.eq_interarrival() == b.eq_interarrival());
  for (std::size_t n = 1; n <= a.horizon(); ++n) {
    REQUIRE(a.interarrival(n) == b.interarrival(n));
    for (int k = 0; k < 3; ++k) {
      REQUIRE(a.requirement(n, k) == b.requirement(n, k));
      REQUIRE(a.waiting(n, k) == b.waiting(n, k));
    }
  }
  BackwardPath c = draw(m, 778);
  CHECK(a.eq_interarrival() != c.eq_interarrival());
}

TEST_CASE("the caller's stream is not consumed by the simulation") {
  const NetworkModel m = testutil::mm2_model(1.4);
  const CramerRoots roots = fjsim::solve_cramer_roots(m);
  RngStream original(4321);
  RngStream copy = original;
  (void)simulate_backward_path(m, roots, original);
  CHECK(original.uniform() == copy.uniform());
}

TEST_CASE("extending the horizon preserves the prefix bit for bit") {
  const NetworkModel m = testutil::mm2_model(1.4);
  BackwardPath p = draw(m, 2024);
  const std::size_t h = p.horizon();
  std::vector<double> before;
  for (std::size_t n = 0; n <= h; ++n)
    for (int k = 0; k < 2; ++k) {
      before.push_back(p.walk(n, k));
      before.push_back(p.future_max(n, k));
      before.push_back(p.waiting(n, k));
    }
  CHECK(!p.tau_horizon_extended());
  p.extend_to(h + 5);
  CHECK(p.tau_horizon_extended());
  REQUIRE(p.horizon() >= h + 5);
  std::size_t idx = 0;
  for (std::size_t n = 0; n <= h; ++n)
    for (int k = 0; k < 2; ++k) {
      REQUIRE(p.walk(n, k) == before[idx++]);
      REQUIRE(p.future_max(n, k) == before[idx++]);
      REQUIRE(p.waiting(n, k) == before[idx++]);
    }
}

TEST_CASE("stop index and work stay bounded in moderate traffic") {
  const NetworkModel m = testutil::mm2_model(1.4);
  double mean_stop = 0.0, mean_steps = 0.0;
  const int reps = 1000;
  for (int i = 0; i < reps; ++i) {
    BackwardPath p = draw(m, 60000 + i);
    mean_stop += static_cast<double>(p.stopping_index());
    mean_steps += static_cast<double>(p.steps_used());
  }
  mean_stop /= reps;
  mean_steps /= reps;
  CHECK(mean_stop > 1.0);
  CHECK(mean_stop < 30.0);
  CHECK(mean_steps < 5000.0);
}

TEST_CASE("heavy traffic still terminates") {
  const NetworkModel m = testutil::mm2_model(1.1);
  for (int i = 0; i < 100; ++i) {
    BackwardPath p = draw(m, 71000 + i);
    REQUIRE(p.stopping_index() >= 1);
  }
}

TEST_CASE("a tiny step budget fails with the budget error") {
  const NetworkModel m = testutil::mm2_model(1.4);
  SamplerOptions opt;
  opt.step_budget = 10;
  try {
    (void)draw(m, 1, opt);
    FAIL("expected the budget to be exhausted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BudgetExceeded);
  }
}

TEST_CASE("options are validated before any sampling") {
  const NetworkModel m = testutil::mm2_model(1.4);
  SamplerOptions bad_c;
  bad_c.milestone_c = 0.0;
  try {
    (void)draw(m, 1, bad_c);
    FAIL("expected rejection of the milestone constant");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
  SamplerOptions bad_budget;
  bad_budget.step_budget = 0;
  try {
    (void)draw(m, 1, bad_budget);
    FAIL("expected rejection of the zero budget");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("fixed-component paths expose the hand-computed walk and maxima") {
  // one station, interarrivals (1, 2), requirements (0.5, 3), rate 1
  BackwardPath p = BackwardPath::from_components({1.0}, 0.5, {1.0, 2.0}, {0.5, 3.0}, 2);
  CHECK(p.stations() == 1);
  CHECK(p.horizon() == 2);
  CHECK(p.stopping_index() == 2);
  CHECK(p.eq_interarrival() == 0.5);
  CHECK(p.walk(0, 0) == 0.0);
  CHECK(p.walk(1, 0) == -0.5);
  CHECK(p.walk(2, 0) == 0.5);
  CHECK(p.future_max(2, 0) == 0.5);
  CHECK(p.future_max(1, 0) == 0.5);
  CHECK(p.future_max(0, 0) == 0.5);
  CHECK(p.waiting(0, 0) == 0.5);
  CHECK(p.waiting(1, 0) == 1.0);
  CHECK(p.waiting(2, 0) == 0.0);
  CHECK(p.arrival_clock(1) == -0.5);
  CHECK(p.arrival_clock(2) == -2.5);
  CHECK(p.steps_used() == 0);
  CHECK_THROWS_AS(p.extend_to(3), Error);
}
