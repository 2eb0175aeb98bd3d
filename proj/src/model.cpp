#include "model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"

namespace fjsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double NetworkModel::utilization(int k) const {
  return service_req[k].mean() / (rates[k] * interarrival.mean());
}

const NetworkModel& validate(const NetworkModel& model) {
  if (model.stations() < 1) raise(ErrorCode::InvalidArgument, "model needs at least one station");
  if (model.service_req.size() != model.rates.size())
    raise(ErrorCode::InvalidArgument, "one service law per station rate is required");
  model.interarrival.check();
  for (int k = 0; k < model.stations(); ++k) {
    model.service_req[k].check();
    if (!(model.rates[k] > 0.0) || !std::isfinite(model.rates[k])) {
      std::ostringstream os;
      os << "station " << (k + 1) << ": service rate must be positive and finite";
      raise(ErrorCode::InvalidArgument, os.str());
    }
    if (!(model.service_req[k].mgf_domain_sup() > 0.0)) {
      std::ostringstream os;
      os << "station " << (k + 1) << ": service law has no exponential moment";
      raise(ErrorCode::HeavyTail, os.str());
    }
    if (!(model.utilization(k) < 1.0)) {
      std::ostringstream os;
      os << "station " << (k + 1) << ": unstable, utilization "
         << model.utilization(k) << " must be below 1";
      raise(ErrorCode::UnstableStation, os.str());
    }
  }
  return model;
}

double increment_sup(const NetworkModel& model, int k) {
  return model.service_req[k].support_sup() / model.rates[k] - model.interarrival.support_inf();
}

double cramer_psi(const NetworkModel& model, int k, double theta) {
  return model.service_req[k].log_mgf(theta / model.rates[k]) +
         model.interarrival.log_mgf(-theta);
}

double cramer_root(const NetworkModel& model, int k) {
  if (increment_sup(model, k) <= 0.0) {
    std::ostringstream os;
    os << "station " << (k + 1) << ": increments never positive, no tilting root exists";
    raise(ErrorCode::RootNotBracketed, os.str());
  }
  const double bound = model.rates[k] * model.service_req[k].mgf_domain_sup();  // may be +inf
  const double cap = std::isfinite(bound) ? 0.999 * bound : kInf;

  // Doubling search for a sign change. psi is negative just right of zero
  // (negative drift) and eventually positive when a root exists.
  double lo = 0.0;
  double hi = 1e-6;
  bool bracketed = false;
  for (int iter = 0; iter < 600; ++iter) {
    const double probe = hi < cap ? hi : cap;
    if (cramer_psi(model, k, probe) > 0.0) {
      hi = probe;
      bracketed = true;
      break;
    }
    lo = probe;
    if (probe >= cap) break;
    hi *= 2.0;
  }
  if (!bracketed) {
    std::ostringstream os;
    os << "station " << (k + 1) << ": no positive tilting root within the mgf domain";
    raise(ErrorCode::RootNotBracketed, os.str());
  }
  for (int iter = 0; iter < 500 && hi - lo > 1e-12; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (cramer_psi(model, k, mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

bool CramerRoots::monotone(int k) const { return !(theta[k] < kInf); }

CramerRoots solve_cramer_roots(const NetworkModel& model) {
  CramerRoots roots;
  const int K = model.stations();
  roots.theta.resize(K);
  roots.residual.resize(K);
  for (int k = 0; k < K; ++k) {
    if (increment_sup(model, k) <= 0.0) {
      roots.theta[k] = kInf;
      roots.residual[k] = 0.0;
    } else {
      roots.theta[k] = cramer_root(model, k);
      roots.residual[k] = cramer_psi(model, k, roots.theta[k]);
    }
  }
  return roots;
}

std::pair<double, std::vector<double>> sample_tilted_pair(const NetworkModel& model, int k,
                                                          double theta, RngStream& rng) {
  std::pair<double, std::vector<double>> out;
  out.first = model.interarrival.sample_tilted(-theta, rng);
  out.second.resize(model.stations());
  for (int j = 0; j < model.stations(); ++j) {
    out.second[j] = (j == k) ? model.service_req[j].sample_tilted(theta / model.rates[j], rng)
                             : model.service_req[j].sample(rng);
  }
  return out;
}

namespace {

DistributionSpec dist_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
    raise(ErrorCode::ParseError, "distribution needs a \"family\" string");
  const std::string fam = j["family"].get<std::string>();
  auto num = [&](const char* key) -> double {
    if (!j.contains(key) || !j[key].is_number()) {
      std::ostringstream os;
      os << fam << " distribution needs numeric \"" << key << "\"";
      raise(ErrorCode::ParseError, os.str());
    }
    return j[key].get<double>();
  };
  if (fam == "exponential") return DistributionSpec::exponential(num("rate"));
  if (fam == "erlang") {
    if (!j.contains("shape") || !j["shape"].is_number_integer())
      raise(ErrorCode::ParseError, "erlang distribution needs integer \"shape\"");
    return DistributionSpec::erlang(j["shape"].get<int>(), num("rate"));
  }
  if (fam == "hyperexponential") {
    if (!j.contains("weights") || !j["weights"].is_array() || !j.contains("rates") ||
        !j["rates"].is_array())
      raise(ErrorCode::ParseError, "hyperexponential distribution needs \"weights\" and \"rates\" arrays");
    return DistributionSpec::hyperexponential(j["weights"].get<std::vector<double>>(),
                                              j["rates"].get<std::vector<double>>());
  }
  if (fam == "uniform") return DistributionSpec::uniform(num("lo"), num("hi"));
  if (fam == "deterministic") return DistributionSpec::deterministic(num("value"));
  raise(ErrorCode::ParseError, "unknown distribution family \"" + fam + "\"");
}

}  // namespace

NetworkModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::ParseError, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("arrival") || !j.contains("stations"))
      raise(ErrorCode::ParseError, "config needs \"arrival\" and \"stations\"");
    NetworkModel m;
    m.interarrival = dist_from_json(j["arrival"]);
    if (!j["stations"].is_array() || j["stations"].empty())
      raise(ErrorCode::ParseError, "\"stations\" must be a nonempty array");
    for (const auto& st : j["stations"]) {
      if (!st.is_object() || !st.contains("service") || !st.contains("rate") ||
          !st["rate"].is_number())
        raise(ErrorCode::ParseError, "each station needs \"service\" and numeric \"rate\"");
      m.service_req.push_back(dist_from_json(st["service"]));
      m.rates.push_back(st["rate"].get<double>());
    }
    return m;
  } catch (const Error&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::ParseError, std::string("malformed config: ") + e.what());
  }
}

}  // namespace fjsim
