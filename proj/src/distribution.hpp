#pragma once

#include <vector>

#include "rng.hpp"

namespace fjsim {

enum class Family {
  Exponential,
  Erlang,
  Hyperexponential,
  Uniform,
  Deterministic,
};

// One of five nonnegative laws with closed-form moments, moment generating
// function, exponential tilt, and equilibrium (stationary excess) law.
//
// Parameter slots by family:
//   Exponential       a = rate
//   Erlang            shape (integer >= 1), a = rate
//   Hyperexponential  weights, rates (parallel vectors)
//   Uniform           a = lower endpoint (>= 0), b = upper endpoint
//   Deterministic     a = value
struct DistributionSpec {
  Family family = Family::Exponential;
  double a = 1.0;
  double b = 0.0;
  int shape = 1;
  std::vector<double> weights;
  std::vector<double> rates;

  static DistributionSpec exponential(double rate);
  static DistributionSpec erlang(int shape, double rate);
  static DistributionSpec hyperexponential(std::vector<double> weights, std::vector<double> rates);
  static DistributionSpec uniform(double lo, double hi);
  static DistributionSpec deterministic(double value);

  void check() const;  // throws InvalidArgument on malformed parameters

  double mean() const;
  double second_moment() const;

  // E[exp(sX)] and its log; defined for s < mgf_domain_sup().
  double mgf(double s) const;
  double log_mgf(double s) const;
  double mgf_domain_sup() const;  // +inf for bounded support

  double support_sup() const;  // +inf for the exponential families
  double support_inf() const;

  double sample(RngStream& rng) const;

  // Draw from the density proportional to exp(sx) f(x); s may be negative.
  double sample_tilted(double s, RngStream& rng) const;

  // Draw from the equilibrium density (1 - F(x)) / mean.
  double sample_equilibrium(RngStream& rng) const;

  const char* family_name() const;
};

}  // namespace fjsim
