#include "distribution.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>

#include "errors.hpp"

namespace fjsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sample_exp(double rate, RngStream& rng) { return -std::log(rng.uniform()) / rate; }

// Inverse CDF of the density proportional to exp(sx) on [lo, hi].
// Anchored at whichever endpoint keeps the intermediate exponent negative.
double sample_tilted_uniform(double lo, double hi, double s, RngStream& rng) {
  const double span = hi - lo;
  const double d = s * span;
  const double u = rng.uniform();
  if (std::fabs(d) < 1e-10) return lo + u * span;
  if (s > 0.0) return hi + std::log(u + (1.0 - u) * std::exp(-d)) / s;
  return lo + std::log((1.0 - u) + u * std::exp(d)) / s;
}

}  // namespace

DistributionSpec DistributionSpec::exponential(double rate) {
  DistributionSpec d;
  d.family = Family::Exponential;
  d.a = rate;
  d.check();
  return d;
}

DistributionSpec DistributionSpec::erlang(int shape, double rate) {
  DistributionSpec d;
  d.family = Family::Erlang;
  d.shape = shape;
  d.a = rate;
  d.check();
  return d;
}

DistributionSpec DistributionSpec::hyperexponential(std::vector<double> weights,
                                                    std::vector<double> rates) {
  DistributionSpec d;
  d.family = Family::Hyperexponential;
  d.weights = std::move(weights);
  d.rates = std::move(rates);
  d.check();
  return d;
}

DistributionSpec DistributionSpec::uniform(double lo, double hi) {
  DistributionSpec d;
  d.family = Family::Uniform;
  d.a = lo;
  d.b = hi;
  d.check();
  return d;
}

DistributionSpec DistributionSpec::deterministic(double value) {
  DistributionSpec d;
  d.family = Family::Deterministic;
  d.a = value;
  d.check();
  return d;
}

void DistributionSpec::check() const {
  auto fail = [&](const char* what) {
    std::ostringstream os;
    os << family_name() << ": " << what;
    raise(ErrorCode::InvalidArgument, os.str());
  };
  switch (family) {
    case Family::Exponential:
      if (!(a > 0.0) || !std::isfinite(a)) fail("rate must be positive and finite");
      break;
    case Family::Erlang:
      if (shape < 1) fail("shape must be a positive integer");
      if (!(a > 0.0) || !std::isfinite(a)) fail("rate must be positive and finite");
      break;
    case Family::Hyperexponential: {
      if (weights.empty() || weights.size() != rates.size())
        fail("weights and rates must be nonempty parallel vectors");
      double total = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) fail("weights must be positive");
        if (!(rates[i] > 0.0) || !std::isfinite(rates[i])) fail("rates must be positive");
        total += weights[i];
      }
      if (std::fabs(total - 1.0) > 1e-9) fail("weights must sum to 1");
      break;
    }
    case Family::Uniform:
      if (!(a >= 0.0) || !std::isfinite(a)) fail("lower endpoint must be nonnegative");
      if (!(b > a) || !std::isfinite(b)) fail("upper endpoint must exceed the lower one");
      break;
    case Family::Deterministic:
      if (!(a > 0.0) || !std::isfinite(a)) fail("value must be positive and finite");
      break;
  }
}

double DistributionSpec::mean() const {
  switch (family) {
    case Family::Exponential: return 1.0 / a;
    case Family::Erlang: return static_cast<double>(shape) / a;
    case Family::Hyperexponential: {
      double m = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) m += weights[i] / rates[i];
      return m;
    }
    case Family::Uniform: return 0.5 * (a + b);
    case Family::Deterministic: return a;
  }
  return 0.0;
}

double DistributionSpec::second_moment() const {
  switch (family) {
    case Family::Exponential: return 2.0 / (a * a);
    case Family::Erlang: return static_cast<double>(shape) * (shape + 1.0) / (a * a);
    case Family::Hyperexponential: {
      double m = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) m += weights[i] * 2.0 / (rates[i] * rates[i]);
      return m;
    }
    case Family::Uniform: return (a * a + a * b + b * b) / 3.0;
    case Family::Deterministic: return a * a;
  }
  return 0.0;
}

double DistributionSpec::mgf_domain_sup() const {
  switch (family) {
    case Family::Exponential: return a;
    case Family::Erlang: return a;
    case Family::Hyperexponential: {
      double m = kInf;
      for (double r : rates) m = std::min(m, r);
      return m;
    }
    case Family::Uniform:
    case Family::Deterministic: return kInf;
  }
  return kInf;
}

double DistributionSpec::support_sup() const {
  switch (family) {
    case Family::Exponential:
    case Family::Erlang:
    case Family::Hyperexponential: return kInf;
    case Family::Uniform: return b;
    case Family::Deterministic: return a;
  }
  return kInf;
}

double DistributionSpec::support_inf() const {
  switch (family) {
    case Family::Exponential:
    case Family::Erlang:
    case Family::Hyperexponential: return 0.0;
    case Family::Uniform: return a;
    case Family::Deterministic: return a;
  }
  return 0.0;
}

double DistributionSpec::log_mgf(double s) const {
  if (!(s < mgf_domain_sup()))
    raise(ErrorCode::TiltOutsideDomain, "mgf argument outside the convergence domain");
  switch (family) {
    case Family::Exponential: return std::log(a) - std::log(a - s);
    case Family::Erlang: return shape * (std::log(a) - std::log(a - s));
    case Family::Hyperexponential: {
      double m = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i)
        m += weights[i] * rates[i] / (rates[i] - s);
      return std::log(m);
    }
    case Family::Uniform: {
      const double d = s * (b - a);
      if (std::fabs(d) < 1e-10) return s * a + std::log1p(0.5 * d + d * d / 6.0);
      return s * a + std::log(std::expm1(d) / d);
    }
    case Family::Deterministic: return s * a;
  }
  return 0.0;
}

double DistributionSpec::mgf(double s) const { return std::exp(log_mgf(s)); }

double DistributionSpec::sample(RngStream& rng) const {
  switch (family) {
    case Family::Exponential: return sample_exp(a, rng);
    case Family::Erlang: {
      double logprod = 0.0;
      for (int i = 0; i < shape; ++i) logprod += std::log(rng.uniform());
      return -logprod / a;
    }
    case Family::Hyperexponential: {
      double u = rng.uniform();
      std::size_t i = 0;
      for (; i + 1 < weights.size(); ++i) {
        if (u < weights[i]) break;
        u -= weights[i];
      }
      return sample_exp(rates[i], rng);
    }
    case Family::Uniform: return a + rng.uniform() * (b - a);
    case Family::Deterministic: return a;
  }
  return 0.0;
}

double DistributionSpec::sample_tilted(double s, RngStream& rng) const {
  if (!(s < mgf_domain_sup()))
    raise(ErrorCode::TiltOutsideDomain, "tilt parameter outside the mgf domain");
  switch (family) {
    case Family::Exponential: return sample_exp(a - s, rng);
    case Family::Erlang: {
      double logprod = 0.0;
      for (int i = 0; i < shape; ++i) logprod += std::log(rng.uniform());
      return -logprod / (a - s);
    }
    case Family::Hyperexponential: {
      // Tilting reweights the mixture by each component's mgf factor and
      // shifts every component rate by s.
      double total = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i)
        total += weights[i] * rates[i] / (rates[i] - s);
      double u = rng.uniform() * total;
      std::size_t i = 0;
      for (; i + 1 < weights.size(); ++i) {
        const double w = weights[i] * rates[i] / (rates[i] - s);
        if (u < w) break;
        u -= w;
      }
      return sample_exp(rates[i] - s, rng);
    }
    case Family::Uniform: return sample_tilted_uniform(a, b, s, rng);
    case Family::Deterministic: return a;
  }
  return 0.0;
}

double DistributionSpec::sample_equilibrium(RngStream& rng) const {
  switch (family) {
    case Family::Exponential: return sample_exp(a, rng);  // memoryless
    case Family::Erlang: {
      // Equilibrium law of an n-stage Erlang is the uniform mixture of
      // Erlang(i, rate), i = 1..n.
      const int stages = 1 + static_cast<int>(rng.uniform() * shape);
      const int n = stages > shape ? shape : stages;
      double logprod = 0.0;
      for (int i = 0; i < n; ++i) logprod += std::log(rng.uniform());
      return -logprod / a;
    }
    case Family::Hyperexponential: {
      // Component i is picked proportionally to its mean contribution
      // w_i / r_i and the excess of an exponential is itself.
      const double m = mean();
      double u = rng.uniform() * m;
      std::size_t i = 0;
      for (; i + 1 < weights.size(); ++i) {
        const double w = weights[i] / rates[i];
        if (u < w) break;
        u -= w;
      }
      return sample_exp(rates[i], rng);
    }
    case Family::Uniform: {
      // Piecewise inversion of F_e(x) = integral of (1 - F) / mean: linear on
      // [0, a], quadratic on [a, b].
      const double m = mean();
      const double t = rng.uniform() * m;
      if (t <= a) return t;
      const double x = b - std::sqrt(2.0 * (b - a) * (m - t));
      return x < a ? a : (x > b ? b : x);
    }
    case Family::Deterministic: return rng.uniform() * a;
  }
  return 0.0;
}

const char* DistributionSpec::family_name() const {
  switch (family) {
    case Family::Exponential: return "exponential";
    case Family::Erlang: return "erlang";
    case Family::Hyperexponential: return "hyperexponential";
    case Family::Uniform: return "uniform";
    case Family::Deterministic: return "deterministic";
  }
  return "?";
}

}  // namespace fjsim
