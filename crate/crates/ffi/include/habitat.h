#ifndef HABITAT_H
#define HABITAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HabStatus {
  HAB_STATUS_OK = 0,
  HAB_STATUS_NULL_POINTER = 1,
  HAB_STATUS_INVALID_UTF8 = 2,
  HAB_STATUS_VALIDATION = 3,
  HAB_STATUS_NUMERICAL = 4,
  HAB_STATUS_IO = 5,
  HAB_STATUS_PANIC = 6,
} HabStatus;

typedef enum HabVerdict {
  HAB_VERDICT_EXTINCT = 0,
  HAB_VERDICT_SURVIVE = 1,
  HAB_VERDICT_UNKNOWN = 2,
} HabVerdict;

// Sub/supersolution envelope.
typedef struct HabEnvelope HabEnvelope;

// A finite element solution.
typedef struct HabFemSolution HabFemSolution;

// A finite-difference reference run.
typedef struct HabOracleRun HabOracleRun;

// A validated scenario.
typedef struct HabScenario HabScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on this thread (empty if none). The
// pointer stays valid until the next failing call on the thread.
const char *hab_last_error(void);

// Library version as a static NUL-terminated string.
const char *hab_version(void);

// Parses and validates a JSON scenario.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum HabStatus hab_scenario_from_json(const char *json, struct HabScenario **out);

// Loads a bundled scenario such as `"ex4-6"`.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum HabStatus hab_scenario_bundled(const char *name, struct HabScenario **out);

// # Safety
// `s` must be null or a handle from this library, not used afterwards.
void hab_scenario_free(struct HabScenario *s);

// Final time of the scenario.
//
// # Safety
// `s` must be a valid handle; `out` must be writable.
enum HabStatus hab_scenario_horizon(const struct HabScenario *s, double *out);

// Closed-form eigenvalue bounds on the fixed domain `(0, length)`.
//
// # Safety
// `s` must be a valid handle; `lower` and `upper` must be writable.
enum HabStatus hab_eigen_bounds(const struct HabScenario *s,
                                double length,
                                double *lower,
                                double *upper);

// Periodic principal eigenvalue on `(0, length)`; zero `nodes` or `steps`
// select the defaults.
//
// # Safety
// `s` must be a valid handle; `out` must be writable.
enum HabStatus hab_floquet_lambda(const struct HabScenario *s,
                                  double length,
                                  size_t nodes,
                                  size_t steps,
                                  double *out);

// Verdict of the closed-form criteria for length `length` and rate `r`.
//
// # Safety
// `s` must be a valid handle; `out` must be writable.
enum HabStatus hab_classify_fixed(const struct HabScenario *s,
                                  double length,
                                  double r,
                                  enum HabVerdict *out);

// Long-time verdict for the shift `c(t0 + t)^exponent` given the
// fixed-domain eigenvalue; `|lambda| <= tol` counts as zero.
//
// # Safety
// `out` must be writable.
enum HabStatus hab_classify_shift(double c,
                                  double exponent,
                                  double d,
                                  double lambda,
                                  double tol,
                                  enum HabVerdict *out);

// Space-time FEM solve; nonpositive `theta` or `delta` select the defaults.
//
// # Safety
// `s` must be a valid handle; `out` must be writable.
enum HabStatus hab_fem_solve(const struct HabScenario *s,
                             size_t nt,
                             size_t nx,
                             double theta,
                             double delta,
                             struct HabFemSolution **out);

// `u_h(t, x)`; zero outside the habitat.
//
// # Safety
// `u` must be a valid handle; `out` must be writable.
enum HabStatus hab_fem_eval(const struct HabFemSolution *u, double t, double x, double *out);

// `‖u_h(t, ·)‖_{L²}`.
//
// # Safety
// `u` must be a valid handle; `out` must be writable.
enum HabStatus hab_fem_slice_l2(const struct HabFemSolution *u, double t, double *out);

// # Safety
// `u` must be null or a handle from this library, not used afterwards.
void hab_fem_free(struct HabFemSolution *u);

// Finite-difference reference run; zero `ny` or nonpositive `tau` select the defaults.
//
// # Safety
// `s` must be a valid handle; `out` must be writable.
enum HabStatus hab_oracle_run(const struct HabScenario *s,
                              size_t ny,
                              double tau,
                              struct HabOracleRun **out);

// `ln(‖u(T)‖/‖u(0)‖)` of a reference run.
//
// # Safety
// `run` must be a valid handle; `out` must be writable.
enum HabStatus hab_oracle_log_growth(const struct HabOracleRun *run, double *out);

// Copies up to `cap` trace points as `(t, ln‖u(t)‖)` pairs into `times` and
// `log_l2`; writes the total number of points to `len`.
//
// # Safety
// `run` must be a valid handle; `times` and `log_l2` must hold `cap`
// values (or be null when `cap` is zero); `len` must be writable.
enum HabStatus hab_oracle_trace(const struct HabOracleRun *run,
                                double *times,
                                double *log_l2,
                                size_t cap,
                                size_t *len);

// # Safety
// `run` must be null or a handle from this library, not used afterwards.
void hab_oracle_free(struct HabOracleRun *run);

// Envelope for the scenario's initial datum; the eigenfunction uses
// `ny + 2` nodes (zero selects the default).
//
// # Safety
// `s` must be a valid handle; `out` must be writable.
enum HabStatus hab_envelope_build(const struct HabScenario *s, size_t ny, struct HabEnvelope **out);

// Lower and upper bound of `v(t, y)` in the fixed frame.
//
// # Safety
// `env` must be a valid handle; `lower` and `upper` must be writable.
enum HabStatus hab_envelope_eval(const struct HabEnvelope *env,
                                 double t,
                                 double y,
                                 double *lower,
                                 double *upper);

// Eigenvalue and sandwich constants `a`, `b` of an envelope.
//
// # Safety
// `env` must be a valid handle; the outputs must be writable.
enum HabStatus hab_envelope_constants(const struct HabEnvelope *env,
                                      double *lambda,
                                      double *a,
                                      double *b);

// # Safety
// `env` must be null or a handle from this library, not used afterwards.
void hab_envelope_free(struct HabEnvelope *env);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HABITAT_H */
