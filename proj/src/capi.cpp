#include "fjsim/fjsim.h"

#include <exception>
#include <new>
#include <string>

#include "errors.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "stats.hpp"

struct fjsim_model {
  fjsim::NetworkModel m;
};

struct fjsim_report {
  fjsim::EstimateReport r;
  std::string json_cache;
};

namespace {

thread_local std::string tls_error;

fjsim_status status_of(fjsim::ErrorCode code) {
  using fjsim::ErrorCode;
  switch (code) {
    case ErrorCode::ParseError:
      return FJSIM_ERROR_PARSE;
    case ErrorCode::UnstableStation:
      return FJSIM_ERROR_UNSTABLE;
    case ErrorCode::BudgetExceeded:
      return FJSIM_ERROR_BUDGET;
    case ErrorCode::InvalidArgument:
    case ErrorCode::HeavyTail:
    case ErrorCode::RootNotBracketed:
    case ErrorCode::TiltOutsideDomain:
    case ErrorCode::InsufficientSamples:
      return FJSIM_ERROR_INVALID;
  }
  return FJSIM_ERROR_INTERNAL;
}

template <typename Fn>
fjsim_status guarded(Fn&& fn) {
  try {
    fn();
    tls_error.clear();
    return FJSIM_OK;
  } catch (const fjsim::Error& e) {
    tls_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    tls_error = "out of memory";
    return FJSIM_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    tls_error = e.what();
    return FJSIM_ERROR_INTERNAL;
  } catch (...) {
    tls_error = "unknown failure";
    return FJSIM_ERROR_INTERNAL;
  }
}

fjsim_status require(bool ok, const char* what) {
  if (ok) return FJSIM_OK;
  tls_error = what;
  return FJSIM_ERROR_INVALID;
}

fjsim::SamplerOptions sampler_options(const fjsim_options& o) {
  fjsim::SamplerOptions s;
  s.milestone_c = o.milestone_c;
  s.step_budget = o.step_budget;
  return s;
}

bool quantity_of(fjsim_quantity q, fjsim::Quantity* out) {
  switch (q) {
    case FJSIM_QUANTITY_SOJOURN:
      *out = fjsim::Quantity::Sojourn;
      return true;
    case FJSIM_QUANTITY_UNSYNC_TOTAL:
      *out = fjsim::Quantity::UnsyncTotal;
      return true;
    case FJSIM_QUANTITY_QUEUE:
      *out = fjsim::Quantity::Queue;
      return true;
    case FJSIM_QUANTITY_UNSYNC:
      *out = fjsim::Quantity::Unsync;
      return true;
    case FJSIM_QUANTITY_GRADIENT:
      *out = fjsim::Quantity::Gradient;
      return true;
    case FJSIM_QUANTITY_GRADIENT_SUM:
      *out = fjsim::Quantity::GradientSum;
      return true;
  }
  return false;
}

}  // namespace

extern "C" {

void fjsim_options_init(fjsim_options* options) {
  if (!options) return;
  options->seed = 12345;
  options->reps = 10000;
  options->threads = 1;
  options->milestone_c = 2.0;
  options->step_budget = 100000000ULL;
}

fjsim_status fjsim_model_parse(const char* json, fjsim_model** out) {
  if (fjsim_status s = require(json && out, "json and out must be non-null")) return s;
  *out = nullptr;
  return guarded([&] {
    auto* m = new fjsim_model{fjsim::model_from_json(json)};
    *out = m;
  });
}

fjsim_status fjsim_model_validate(const fjsim_model* model) {
  if (fjsim_status s = require(model != nullptr, "model must be non-null")) return s;
  return guarded([&] { fjsim::validate(model->m); });
}

fjsim_status fjsim_model_stations(const fjsim_model* model, int32_t* out) {
  if (fjsim_status s = require(model && out, "model and out must be non-null")) return s;
  *out = static_cast<int32_t>(model->m.stations());
  tls_error.clear();
  return FJSIM_OK;
}

void fjsim_model_free(fjsim_model* model) { delete model; }

fjsim_status fjsim_estimate(const fjsim_model* model, const fjsim_options* options,
                            fjsim_report** out) {
  if (fjsim_status s = require(model && options && out, "model, options, out must be non-null"))
    return s;
  *out = nullptr;
  return guarded([&] {
    auto report = fjsim::run_experiment(model->m, options->reps, options->seed,
                                        sampler_options(*options), options->threads);
    *out = new fjsim_report{std::move(report), {}};
  });
}

fjsim_status fjsim_coverage(const fjsim_model* model, fjsim_quantity quantity, int32_t station,
                            double truth, int32_t n_cis, int32_t reps_per_ci,
                            const fjsim_options* options, int32_t* covered, int32_t* total) {
  if (fjsim_status s = require(model && options && covered && total,
                               "model, options, covered, total must be non-null"))
    return s;
  fjsim::Quantity q;
  if (fjsim_status s = require(quantity_of(quantity, &q), "unknown quantity")) return s;
  return guarded([&] {
    const auto res = fjsim::coverage_experiment(model->m, q, station, truth, n_cis, reps_per_ci,
                                                options->seed, sampler_options(*options),
                                                options->threads);
    *covered = res.covered;
    *total = res.total;
  });
}

fjsim_status fjsim_report_reps(const fjsim_report* report, int32_t* out) {
  if (fjsim_status s = require(report && out, "report and out must be non-null")) return s;
  *out = report->r.reps;
  tls_error.clear();
  return FJSIM_OK;
}

fjsim_status fjsim_report_seed(const fjsim_report* report, uint64_t* out) {
  if (fjsim_status s = require(report && out, "report and out must be non-null")) return s;
  *out = report->r.seed;
  tls_error.clear();
  return FJSIM_OK;
}

fjsim_status fjsim_report_seconds(const fjsim_report* report, double* out) {
  if (fjsim_status s = require(report && out, "report and out must be non-null")) return s;
  *out = report->r.seconds;
  tls_error.clear();
  return FJSIM_OK;
}

fjsim_status fjsim_report_stat(const fjsim_report* report, fjsim_quantity quantity, int32_t station,
                               double* mean, double* half_width) {
  if (fjsim_status s = require(report && mean && half_width,
                               "report, mean, half_width must be non-null"))
    return s;
  fjsim::Quantity q;
  if (fjsim_status s = require(quantity_of(quantity, &q), "unknown quantity")) return s;
  return guarded([&] {
    const fjsim::EstimateReport& r = report->r;
    const fjsim::QuantityStat* st = nullptr;
    switch (q) {
      case fjsim::Quantity::Sojourn:
        st = &r.sojourn;
        break;
      case fjsim::Quantity::UnsyncTotal:
        st = &r.unsync_total;
        break;
      case fjsim::Quantity::GradientSum:
        st = &r.gradient_sum;
        break;
      default: {
        if (station < 0 || station >= r.stations)
          fjsim::raise(fjsim::ErrorCode::InvalidArgument, "station index out of range");
        if (q == fjsim::Quantity::Queue) st = &r.queue[station];
        if (q == fjsim::Quantity::Unsync) st = &r.unsync[station];
        if (q == fjsim::Quantity::Gradient) st = &r.gradient[station];
        break;
      }
    }
    *mean = st->mean;
    *half_width = st->half_width;
  });
}

const char* fjsim_report_json(fjsim_report* report, int include_timing) {
  if (!report) return "";
  report->json_cache = report->r.to_json(include_timing != 0);
  return report->json_cache.c_str();
}

void fjsim_report_free(fjsim_report* report) { delete report; }

fjsim_status fjsim_mm2_sojourn(double lambda, double mu, double* out) {
  if (fjsim_status s = require(out != nullptr, "out must be non-null")) return s;
  return guarded([&] { *out = fjsim::mm_forkjoin_mean_sojourn(lambda, mu); });
}

fjsim_status fjsim_mm2_unsync(double lambda, double mu, double* out) {
  if (fjsim_status s = require(out != nullptr, "out must be non-null")) return s;
  return guarded([&] { *out = fjsim::mm_forkjoin_mean_unsync(lambda, mu); });
}

fjsim_status fjsim_mm2_sojourn_derivative(double lambda, double mu, double* out) {
  if (fjsim_status s = require(out != nullptr, "out must be non-null")) return s;
  return guarded([&] { *out = fjsim::mm_forkjoin_sojourn_derivative(lambda, mu); });
}

const char* fjsim_last_error(void) { return tls_error.c_str(); }

const char* fjsim_version(void) { return "0.1.0"; }

}  // extern "C"
