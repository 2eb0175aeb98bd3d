#pragma once

#include <string>
#include <utility>
#include <vector>

#include "distribution.hpp"
#include "rng.hpp"

namespace fjsim {

// A fork-join network: every arriving job splits into one task per station,
// the tasks queue FCFS, and the job leaves when the last task finishes.
// Station k serves task n in requirement(n) / rates[k] time units.
struct NetworkModel {
  DistributionSpec interarrival;
  std::vector<DistributionSpec> service_req;
  std::vector<double> rates;

  int stations() const { return static_cast<int>(rates.size()); }
  double utilization(int k) const;  // E[J_k] / (mu_k E[I])
};

// Structural and stability validation. Throws InvalidArgument for malformed
// input, UnstableStation when some station has utilization >= 1, HeavyTail
// when a service law admits no exponential moment at all.
const NetworkModel& validate(const NetworkModel& model);

NetworkModel model_from_json(const std::string& text);

// Largest possible one-step rise of coordinate k of the backward walk,
// sup supp(J_k / mu_k - I). Nonpositive means the coordinate can never
// climb and needs no tilting root.
double increment_sup(const NetworkModel& model, int k);

// log E[exp(theta (J_k / mu_k - I))]
double cramer_psi(const NetworkModel& model, int k, double theta);

// The positive root of cramer_psi(model, k, .). Brackets by doubling from
// 1e-6 (capped at 99.9% of the mgf domain edge), then bisects to 1e-12.
// Throws RootNotBracketed when no positive root exists.
double cramer_root(const NetworkModel& model, int k);

struct CramerRoots {
  std::vector<double> theta;     // +inf marks a coordinate with nonpositive increments
  std::vector<double> residual;  // cramer_psi at the returned root, 0 for monotone coordinates

  bool monotone(int k) const;
};

CramerRoots solve_cramer_roots(const NetworkModel& model);

// Joint increment draw under the coordinate-k tilt: the interarrival is
// tilted by -theta, requirement k by +theta / mu_k, all other requirements
// stay nominal. Returns (I, J vector).
std::pair<double, std::vector<double>> sample_tilted_pair(const NetworkModel& model, int k,
                                                          double theta, RngStream& rng);

}  // namespace fjsim
