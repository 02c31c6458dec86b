#ifndef TRAPPING_LAB_H
#define TRAPPING_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TlStatus {
  TL_STATUS_OK = 0,
  TL_STATUS_NULL_POINTER = 1,
  TL_STATUS_INVALID_ARGUMENT = 2,
  TL_STATUS_CONFIG = 3,
  TL_STATUS_NUMERICAL = 4,
  TL_STATUS_PANIC = 5,
} TlStatus;

typedef enum TlModel {
  TL_MODEL_POWER_LAW = 0,
  TL_MODEL_LOG_ENHANCED = 1,
  TL_MODEL_EXPONENTIAL = 2,
} TlModel;

/**
 * Discretized operator with its cutoff and absorbing potential.
 */
typedef struct TlOperator TlOperator;

/**
 * Potential profile.
 */
typedef struct TlPotential TlPotential;

/**
 * Result of a classical trapped-set scan.
 */
typedef struct TlReport TlReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes, excluding the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t tl_last_error_message(char *buf, size_t len);

/**
 * Creates a potential from a family name (`"Zero"`, `"AttractiveBump"`,
 * `"EckartBarrier"`, `"DoubleBarrier"`) and `count` named parameters.
 * A non-positive `sigma` selects the family default.
 *
 * # Safety
 * `family` and each `names[i]` must be NUL-terminated strings; `names` and
 * `values` must hold `count` entries; `out` must be writable.
 */
enum TlStatus tl_potential_new(const char *family,
                               const char *const *names,
                               const double *values,
                               size_t count,
                               double sigma,
                               struct TlPotential **out);

/**
 * # Safety
 * `p` must be null or a handle from [`tl_potential_new`] not yet freed.
 */
void tl_potential_free(struct TlPotential *p);

/**
 * `V(x)` (`order` 0), `V'(x)` (1) or `V''(x)` (2).
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum TlStatus tl_potential_eval(const struct TlPotential *p, double x, uint32_t order, double *out);

/**
 * Classical trapped-set scan at energy `e0` with default settings.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum TlStatus tl_classify(const struct TlPotential *p, double e0, struct TlReport **out);

/**
 * # Safety
 * `r` must be null or a live report handle.
 */
void tl_report_free(struct TlReport *r);

/**
 * Writes 1 for a trapping energy, 0 otherwise.
 *
 * # Safety
 * `r` must be a live handle and `out` writable.
 */
enum TlStatus tl_report_is_trapping(const struct TlReport *r, int32_t *out);

/**
 * Stability rate of the trapped set; `InvalidArgument` when nothing is trapped.
 *
 * # Safety
 * `r` must be a live handle and `out` writable.
 */
enum TlStatus tl_report_gamma(const struct TlReport *r, double *out);

/**
 * Spatial hull `[lo, hi]` of the trapped samples; `InvalidArgument` when nothing is trapped.
 *
 * # Safety
 * `r` must be a live handle and `lo`, `hi` writable.
 */
enum TlStatus tl_report_hull(const struct TlReport *r, double *lo, double *hi);

/**
 * Builds the operator on `[-half_width, half_width]` resolving energies up
 * to `max_energy`, with absorbing ramp from `r_a` of strength `eta` and a
 * symmetric cutoff of plateau radius `chi_radius` and ramp width `chi_ramp`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum TlStatus tl_operator_new(const struct TlPotential *p,
                              double half_width,
                              double h,
                              double max_energy,
                              double points_per_wavelength,
                              double r_a,
                              double eta,
                              double chi_radius,
                              double chi_ramp,
                              struct TlOperator **out);

/**
 * # Safety
 * `op` must be null or a live operator handle.
 */
void tl_operator_free(struct TlOperator *op);

/**
 * Number of grid points.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum TlStatus tl_operator_len(const struct TlOperator *op, size_t *out);

/**
 * `||chi (P - z - iW)^{-1} chi||`; `converged` receives 0 when the iteration cap was hit.
 *
 * # Safety
 * `op` must be a live handle; `norm` and `converged` writable.
 */
enum TlStatus tl_estimate_norm(const struct TlOperator *op,
                               double z,
                               double tol,
                               size_t max_iter,
                               uint64_t seed,
                               double *norm,
                               int32_t *converged);

/**
 * Sweep of `count` energies on `[e0 - eps, e0 + eps]` with refinement; writes
 * the sup of the norm, `K = h sup`, its location, and 1 in `lower_bound_only`
 * when some sample did not converge.
 *
 * # Safety
 * `op` must be a live handle; all outputs writable.
 */
enum TlStatus tl_sweep(const struct TlOperator *op,
                       double e0,
                       double eps,
                       size_t count,
                       double tol,
                       double *sup_norm,
                       double *k,
                       double *argmax_z,
                       int32_t *lower_bound_only);

/**
 * Selects a growth model for `n` pairs `(h[i], values[i])`, `h` strictly
 * decreasing. Writes the model, its `C`, its second parameter (`p`, `b` or
 * `nu`) and 1 in `ambiguous` for a near-tie.
 *
 * # Safety
 * `h` and `values` must hold `n` entries; outputs writable.
 */
enum TlStatus tl_fit_classify(const double *h,
                              const double *values,
                              size_t n,
                              enum TlModel *model,
                              double *c,
                              double *param,
                              int32_t *ambiguous);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRAPPING_LAB_H */
