#ifndef DGM_H
#define DGM_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum {
  DGM_STATUS_OK = 0,
  DGM_STATUS_NULL_POINTER = 1,
  DGM_STATUS_INVALID_ARGUMENT = 2,
  DGM_STATUS_CONFIG = 3,
  DGM_STATUS_EVALUATION = 4,
  DGM_STATUS_INNER_SOLVER_FAILED = 5,
  DGM_STATUS_DIVERGED = 6,
  DGM_STATUS_IO = 7,
  DGM_STATUS_PANIC = 8,
} DgmStatus;

/**
 * Optimisation problem handle.
 */
typedef struct DgmProblem DgmProblem;

/**
 * Result of a single optimisation run.
 */
typedef struct DgmTrace DgmTrace;

/**
 * Objective value at `x[0..n]`.
 */
typedef double (*DgmValueFn)(const double *x, size_t n, void *user_data);

/**
 * Writes the gradient at `x[0..n]` into `grad[0..n]`.
 */
typedef void (*DgmGradientFn)(const double *x, double *grad, size_t n, void *user_data);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *dgm_version(void);

/**
 * Copies the last error message of this thread into `buf` (always
 * NUL-terminated when `cap > 0`) and returns the full message length.
 * Returns 0 if no error has been recorded.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes.
 */
size_t dgm_last_error_message(char *buf, size_t cap);

/**
 * Builds one of the built-in problem families from a JSON object such as
 * `{"family": "quadratic", "n": 50, "kappa": 100, "seed": 0}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
DgmStatus dgm_problem_from_json(const char *json, DgmProblem **out);

/**
 * Builds a problem from user callbacks. `gradient` may be null, in which
 * case only derivative-free methods (Itoh–Abe variants) can run. `lipschitz`
 * bounds the gradient's Lipschitz constant and `mu` is the strong convexity
 * constant (0 if unknown); both drive the step-size policies.
 *
 * # Safety
 * `x0` must point to `dim` values and `out` must be valid. The callbacks and
 * `user_data` must remain valid, and be safe to call from any thread, until
 * the problem is freed.
 */
DgmStatus dgm_problem_from_callbacks(size_t dim,
                                     DgmValueFn value,
                                     DgmGradientFn gradient,
                                     void *user_data,
                                     const double *x0,
                                     double lipschitz,
                                     double mu,
                                     bool convex,
                                     DgmProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle not yet freed.
 */
void dgm_problem_free(DgmProblem *problem);

/**
 * # Safety
 * `problem` must be a live handle and `out` a valid pointer.
 */
DgmStatus dgm_problem_dim(const DgmProblem *problem, size_t *out);

/**
 * Copies the starting point into `out[0..n]`; `n` must equal the dimension.
 *
 * # Safety
 * `problem` must be a live handle and `out` must point to `n` doubles.
 */
DgmStatus dgm_problem_x0(const DgmProblem *problem, double *out, size_t n);

/**
 * # Safety
 * `problem` must be a live handle, `x` must point to `n` doubles and `out`
 * must be valid.
 */
DgmStatus dgm_problem_value(const DgmProblem *problem, const double *x, size_t n, double *out);

/**
 * # Safety
 * `problem` must be a live handle; `x` and `grad` must point to `n` doubles.
 */
DgmStatus dgm_problem_gradient(const DgmProblem *problem, const double *x, double *grad, size_t n);

/**
 * Runs one method, described as JSON, for at most `iterations` steps, e.g.
 * `{"method": "discrete_gradient", "scheme": {"kind": "itoh_abe"},
 * "policy": {"kind": "coordinate_scaled", "factor": 2.0}}`. A run that stops early still yields a trace;
 * inspect it with [`dgm_trace_status`].
 *
 * # Safety
 * `problem` must be a live handle, `method_json` a NUL-terminated string
 * and `out` a valid pointer.
 */
DgmStatus dgm_solve(const DgmProblem *problem,
                    const char *method_json,
                    size_t iterations,
                    uint64_t seed,
                    DgmTrace **out);

/**
 * # Safety
 * `trace` must be null or a handle not yet freed.
 */
void dgm_trace_free(DgmTrace *trace);

/**
 * Number of recorded iterates, including the starting point.
 *
 * # Safety
 * `trace` must be null or a live handle. Null yields 0.
 */
size_t dgm_trace_len(const DgmTrace *trace);

/**
 * How the run ended: `Ok` if it completed or converged, otherwise the
 * reason it stopped early.
 *
 * # Safety
 * `trace` must be a live handle.
 */
DgmStatus dgm_trace_status(const DgmTrace *trace);

/**
 * Copies the objective values `V(x_0), …` into `out[0..n]`, where `n`
 * must equal [`dgm_trace_len`].
 *
 * # Safety
 * `trace` must be a live handle and `out` must point to `n` doubles.
 */
DgmStatus dgm_trace_objectives(const DgmTrace *trace, double *out, size_t n);

/**
 * Copies the final iterate into `out[0..n]`; `n` must equal the dimension.
 *
 * # Safety
 * `trace` must be a live handle and `out` must point to `n` doubles.
 */
DgmStatus dgm_trace_final_point(const DgmTrace *trace, double *out, size_t n);

/**
 * Runs a full experiment from its JSON description and writes traces,
 * aggregates and a summary under `out_dir`.
 *
 * # Safety
 * Both arguments must be NUL-terminated strings.
 */
DgmStatus dgm_run_experiment(const char *spec_json, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DGM_H */
