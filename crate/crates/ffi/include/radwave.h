#ifndef RADWAVE_H
#define RADWAVE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Data profile families.
 */
typedef enum RwProfile {
  /**
   * Power-law data saturating the envelope.
   */
  RW_PROFILE_POWER = 0,
  /**
   * A smooth bump on `[1, 2]`.
   */
  RW_PROFILE_COMPACT = 1,
  /**
   * Zero data.
   */
  RW_PROFILE_ZERO = 2,
} RwProfile;

/**
 * Status codes returned by every fallible call.
 */
typedef enum RwStatus {
  RW_STATUS_OK = 0,
  RW_STATUS_NULL_POINTER = 1,
  RW_STATUS_INVALID_PARAMETER = 2,
  RW_STATUS_DOMAIN = 3,
  RW_STATUS_POLE = 4,
  RW_STATUS_DERIVATIVE_ORDER = 5,
  RW_STATUS_QUADRATURE = 6,
  RW_STATUS_PROFILE = 7,
  RW_STATUS_GRID = 8,
  RW_STATUS_PANIC = 9,
} RwStatus;

/**
 * Opaque solver: the Riemann operator for one dimension and a data pair.
 */
typedef struct RwSolver RwSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a solver for dimension `n` with data of the given family
 * matched to the envelope `(eps, k_num/k_den, l)`. The envelope is
 * ignored for zero data. Free the handle with `rw_solver_free`.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum RwStatus rw_solver_new(uint32_t n,
                            enum RwProfile profile,
                            double eps,
                            int64_t k_num,
                            int64_t k_den,
                            uint32_t l,
                            struct RwSolver **out);

/**
 * Releases a solver. Null is accepted.
 *
 * # Safety
 * `solver` must be null or a handle from `rw_solver_new` not yet freed.
 */
void rw_solver_free(struct RwSolver *solver);

/**
 * Space dimension of a solver.
 *
 * # Safety
 * `solver` must be a live handle; `out` must be valid for writing.
 */
enum RwStatus rw_solver_dimension(const struct RwSolver *solver, uint32_t *out);

/**
 * `∂_r^{beta_r} ∂_t^{beta_t} u0(r, t)`.
 *
 * # Safety
 * `solver` must be a live handle; `out` must be valid for writing.
 */
enum RwStatus rw_solver_eval(const struct RwSolver *solver,
                             double r,
                             double t,
                             uint32_t beta_r,
                             uint32_t beta_t,
                             double *out);

/**
 * Majorant of `|D^β u0|` selected by `k = k_num/k_den` against
 * `(n − 1)/2`, evaluated at `(r, t)` with `|β| = beta`.
 *
 * # Safety
 * `out` must be valid for writing.
 */
enum RwStatus rw_decay_bound(uint32_t n,
                             int64_t k_num,
                             int64_t k_den,
                             uint32_t l,
                             uint32_t beta,
                             double eps,
                             double r,
                             double t,
                             double *out);

/**
 * Message of the last failed call on this thread, or null after a
 * success. The pointer stays valid until the next call on this thread.
 */
const char *rw_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rw_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADWAVE_H */
