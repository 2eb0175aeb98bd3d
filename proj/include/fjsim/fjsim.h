/* C interface to the fork-join stationary-state sampler.
 *
 * All functions return fjsim_status; outputs are written through pointers
 * only on FJSIM_OK. fjsim_last_error() describes the most recent failure on
 * the calling thread. Station indices are 0-based. No exceptions cross this
 * boundary.
 */
#ifndef FJSIM_H
#define FJSIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define FJSIM_API __declspec(dllexport)
#else
#define FJSIM_API __attribute__((visibility("default")))
#endif

typedef enum fjsim_status {
  FJSIM_OK = 0,
  FJSIM_ERROR_INVALID = 1,  /* bad argument or model outside the method's domain */
  FJSIM_ERROR_PARSE = 2,    /* malformed model JSON */
  FJSIM_ERROR_UNSTABLE = 3, /* some station has utilization at or above one */
  FJSIM_ERROR_BUDGET = 4,   /* per-path increment budget exhausted */
  FJSIM_ERROR_INTERNAL = 5
} fjsim_status;

typedef enum fjsim_quantity {
  FJSIM_QUANTITY_SOJOURN = 0,      /* stationary sojourn time, scalar */
  FJSIM_QUANTITY_UNSYNC_TOTAL = 1, /* jobs waiting on the join, all stations */
  FJSIM_QUANTITY_QUEUE = 2,        /* jobs at a station, per station */
  FJSIM_QUANTITY_UNSYNC = 3,       /* jobs waiting on the join, per station */
  FJSIM_QUANTITY_GRADIENT = 4,     /* d E[sojourn] / d rate_k, per station */
  FJSIM_QUANTITY_GRADIENT_SUM = 5  /* sum of the gradient coordinates */
} fjsim_quantity;

typedef struct fjsim_model fjsim_model;
typedef struct fjsim_report fjsim_report;

typedef struct fjsim_options {
  uint64_t seed;
  int32_t reps;
  int32_t threads;
  double milestone_c;   /* certification gap constant, > 0 */
  uint64_t step_budget; /* max increment draws per replication path */
} fjsim_options;

/* Fill an options struct with the defaults (seed 12345, 10000 reps, one
 * thread, milestone constant 2.0, budget 100000000). */
FJSIM_API void fjsim_options_init(fjsim_options* options);

/* Model JSON shape:
 *   {"arrival": DIST, "stations": [{"service": DIST, "rate": NUM}, ...]}
 * DIST is one of
 *   {"family": "exponential", "rate": NUM}
 *   {"family": "erlang", "shape": INT, "rate": NUM}
 *   {"family": "hyperexponential", "weights": [..], "rates": [..]}
 *   {"family": "uniform", "lo": NUM, "hi": NUM}
 *   {"family": "deterministic", "value": NUM}
 */
FJSIM_API fjsim_status fjsim_model_parse(const char* json, fjsim_model** out);
FJSIM_API fjsim_status fjsim_model_validate(const fjsim_model* model);
FJSIM_API fjsim_status fjsim_model_stations(const fjsim_model* model, int32_t* out);
FJSIM_API void fjsim_model_free(fjsim_model* model);

/* Draw options->reps exact stationary samples and reduce them to confidence
 * intervals. The result is a pure function of (model, options) except for
 * the wall-time field. */
FJSIM_API fjsim_status fjsim_estimate(const fjsim_model* model, const fjsim_options* options,
                                      fjsim_report** out);

/* Repeat the estimate n_cis times on independent seeds and count how many
 * 95% intervals for the chosen quantity cover truth. */
FJSIM_API fjsim_status fjsim_coverage(const fjsim_model* model, fjsim_quantity quantity,
                                      int32_t station, double truth, int32_t n_cis,
                                      int32_t reps_per_ci, const fjsim_options* options,
                                      int32_t* covered, int32_t* total);

FJSIM_API fjsim_status fjsim_report_reps(const fjsim_report* report, int32_t* out);
FJSIM_API fjsim_status fjsim_report_seed(const fjsim_report* report, uint64_t* out);
FJSIM_API fjsim_status fjsim_report_seconds(const fjsim_report* report, double* out);
/* station is ignored for the scalar quantities. */
FJSIM_API fjsim_status fjsim_report_stat(const fjsim_report* report, fjsim_quantity quantity,
                                         int32_t station, double* mean, double* half_width);
/* Borrowed pointer, valid until fjsim_report_free. include_timing != 0 adds
 * the wall-time field. */
FJSIM_API const char* fjsim_report_json(fjsim_report* report, int include_timing);
FJSIM_API void fjsim_report_free(fjsim_report* report);

/* Closed forms for the symmetric two-station exponential network (unit-rate
 * requirements): mean sojourn, mean join-wait count, and the sojourn
 * derivative in the common service rate. */
FJSIM_API fjsim_status fjsim_mm2_sojourn(double lambda, double mu, double* out);
FJSIM_API fjsim_status fjsim_mm2_unsync(double lambda, double mu, double* out);
FJSIM_API fjsim_status fjsim_mm2_sojourn_derivative(double lambda, double mu, double* out);

/* Message for the last failing call on this thread; empty string if none. */
FJSIM_API const char* fjsim_last_error(void);

FJSIM_API const char* fjsim_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FJSIM_H */
