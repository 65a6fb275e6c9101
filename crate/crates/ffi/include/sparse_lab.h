#ifndef SPARSE_LAB_H
#define SPARSE_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_INVALID_ARGUMENT = 2,
  SL_STATUS_DIMENSION_MISMATCH = 3,
  SL_STATUS_NO_PHASE_BOUNDARY = 4,
  SL_STATUS_NOT_CONVERGED = 5,
  SL_STATUS_INTERNAL = 6,
} SlStatus;

// Opaque decoder output.
typedef struct SlDecodeResult SlDecodeResult;

// Opaque problem instance.
typedef struct SlInstance SlInstance;

// Parameters of one problem ensemble.
typedef struct SlSystemParams {
  double alpha;
  double lambda;
  double rho_x;
  double rho_w;
  double sigma2_x;
  double sigma2_w;
} SlSystemParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Static, NUL-terminated description of a status code.
const char *sl_status_message(enum SlStatus status);

// Gaussian tail probability `P(Z > x)`.
double sl_q_function(double x);

// # Safety
// `out` must be null or valid for a write of one `double`.
enum SlStatus sl_s_func(double x, double *out);

// # Safety
// `out` must be null or valid for a write of one `double`.
enum SlStatus sl_r_lambda(double lambda, double h, double *out);

// Largest signal density with perfect recovery.
//
// # Safety
// `out` must be null or valid for a write of one `double`.
enum SlStatus sl_critical_rho_x(double alpha, double lambda, double rho_w, double *out);

// Smallest compression ratio with perfect recovery.
//
// # Safety
// `out` must be null or valid for a write of one `double`.
enum SlStatus sl_critical_alpha(double lambda, double rho_x, double rho_w, double *out);

// Regularization weight maximizing the critical signal density.
//
// # Safety
// Both out-pointers must be null or valid for a write of one `double`.
enum SlStatus sl_optimize_lambda(double alpha, double rho_w, double *lambda_out, double *rho_x_out);

// Predicted per-component mse. `perfect_out` receives 1 in the perfect
// phase (where the mse is 0) and 0 otherwise.
//
// # Safety
// `params` must point to a valid `SlSystemParams`; the out-pointers must
// be null or valid for one write each.
enum SlStatus sl_predicted_mse(const struct SlSystemParams *params,
                               double *mse_out,
                               int32_t *perfect_out);

// Builds an instance from an `m x n` column-major matrix and `m`
// observations.
//
// # Safety
// `a` must point to `m * n` doubles, `y` to `m` doubles, and `out` must be
// valid for one pointer write.
enum SlStatus sl_instance_new(size_t m,
                              size_t n,
                              const double *a,
                              const double *y,
                              struct SlInstance **out);

// # Safety
// `inst` must be null or a handle from `sl_instance_new` not yet freed.
void sl_instance_free(struct SlInstance *inst);

// Decodes with the default configuration and an iteration cap
// (`max_iters = 0` keeps the default).
//
// # Safety
// `inst` must be a live instance handle and `out` valid for one pointer
// write.
enum SlStatus sl_decode(const struct SlInstance *inst,
                        double lambda,
                        size_t max_iters,
                        struct SlDecodeResult **out);

// Objective value at the estimate, or NaN for a null handle.
//
// # Safety
// `res` must be null or a live result handle.
double sl_result_objective(const struct SlDecodeResult *res);

// 1 if the estimate carries an optimality certificate, else 0.
//
// # Safety
// `res` must be null or a live result handle.
int32_t sl_result_converged(const struct SlDecodeResult *res);

// Length of the estimate.
//
// # Safety
// `res` must be null or a live result handle.
size_t sl_result_len(const struct SlDecodeResult *res);

// Copies the estimate into `buf`, which must hold `len` doubles with
// `len` equal to `sl_result_len`.
//
// # Safety
// `res` must be a live result handle and `buf` valid for `len` writes.
enum SlStatus sl_result_x_hat(const struct SlDecodeResult *res, double *buf, size_t len);

// # Safety
// `res` must be null or a handle from `sl_decode` not yet freed.
void sl_result_free(struct SlDecodeResult *res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSE_LAB_H */
