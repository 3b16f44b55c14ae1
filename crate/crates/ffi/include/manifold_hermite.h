#ifndef MANIFOLD_HERMITE_H
#define MANIFOLD_HERMITE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum {
  MH_STATUS_OK = 0,
  MH_STATUS_NULL_POINTER = 1,
  /**
   * Bad shapes, parameters, or points/vectors off the manifold.
   */
  MH_STATUS_INVALID_INPUT = 2,
  /**
   * A logarithm was requested outside its domain.
   */
  MH_STATUS_DOMAIN = 3,
  /**
   * The samples cannot support the interpolant (span, sum constraint or
   * Kriging factorization failure).
   */
  MH_STATUS_DEGENERATE_DATA = 4,
  /**
   * Barycenter descent did not converge.
   */
  MH_STATUS_NON_CONVERGENCE = 5,
  /**
   * Internal error; the library caught a panic.
   */
  MH_STATUS_PANIC = 6,
} MhStatus;

typedef enum {
  MH_MANIFOLD_SPHERE = 0,
  MH_MANIFOLD_SO3 = 1,
  /**
   * Needs the dimension argument of the build call.
   */
  MH_MANIFOLD_EUCLIDEAN = 2,
} MhManifold;

/**
 * Opaque barycentric Hermite interpolant.
 */
typedef struct MhBhi MhBhi;

/**
 * Opaque tangent-space Hermite interpolant.
 */
typedef struct MhThi MhThi;

/**
 * Descent parameters for barycenter computations.
 */
typedef struct {
  double step;
  double tolerance;
  size_t max_iterations;
} MhDescent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default descent parameters (unit step, tolerance 1e-8, 500 iterations).
 */
MhDescent mh_descent_default(void);

/**
 * Message of the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *mh_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mh_version(void);

/**
 * Builds a BHI model. `euclidean_dim` is ignored unless `manifold` is
 * `MH_MANIFOLD_EUCLIDEAN`. `descent` may be null for the defaults.
 *
 * # Safety
 * Pointers follow the layouts in the crate docs; `out` must be writable.
 */
MhStatus mh_bhi_build(MhManifold manifold,
                      size_t euclidean_dim,
                      size_t k,
                      size_t d,
                      const double *locations,
                      const double *points,
                      const double *derivatives,
                      const double *theta,
                      const MhDescent *descent,
                      MhBhi **out);

/**
 * Evaluates the BHI interpolant, warm-started from the previous result.
 * Not safe to call concurrently on one handle.
 *
 * # Safety
 * `model` comes from [`mh_bhi_build`]; `omega` holds `d` doubles, `out`
 * holds `out_len` doubles; `iterations` may be null.
 */
MhStatus mh_bhi_query(MhBhi *model,
                      const double *omega,
                      size_t d,
                      double *out,
                      size_t out_len,
                      size_t *iterations);

/**
 * Evaluates the BHI interpolant from the fixed initial guess. Safe to call
 * concurrently on one handle.
 *
 * # Safety
 * As for [`mh_bhi_query`].
 */
MhStatus mh_bhi_query_stateless(const MhBhi *model,
                                const double *omega,
                                size_t d,
                                double *out,
                                size_t out_len,
                                size_t *iterations);

/**
 * Ambient dimension of the model's points, or 0 for a null handle.
 *
 * # Safety
 * `model` is null or comes from [`mh_bhi_build`].
 */
size_t mh_bhi_ambient_dim(const MhBhi *model);

/**
 * # Safety
 * `model` is null or comes from [`mh_bhi_build`] and is not used afterwards.
 */
void mh_bhi_free(MhBhi *model);

/**
 * Builds a THI model. `base_sample` selects the tangent-space base point:
 * a negative value uses the Riemannian barycenter of the samples, otherwise
 * the zero-based sample index. `dt` is the finite-difference step for moving
 * derivatives into the base tangent space. `descent` may be null.
 *
 * # Safety
 * As for [`mh_bhi_build`].
 */
MhStatus mh_thi_build(MhManifold manifold,
                      size_t euclidean_dim,
                      size_t k,
                      size_t d,
                      const double *locations,
                      const double *points,
                      const double *derivatives,
                      const double *theta,
                      int64_t base_sample,
                      double dt,
                      const MhDescent *descent,
                      MhThi **out);

/**
 * Evaluates the THI interpolant. Safe to call concurrently on one handle.
 *
 * # Safety
 * `model` comes from [`mh_thi_build`]; `omega` holds `d` doubles, `out`
 * holds `out_len` doubles.
 */
MhStatus mh_thi_query(const MhThi *model,
                      const double *omega,
                      size_t d,
                      double *out,
                      size_t out_len);

/**
 * # Safety
 * `model` is null or comes from [`mh_thi_build`].
 */
size_t mh_thi_ambient_dim(const MhThi *model);

/**
 * # Safety
 * `model` is null or comes from [`mh_thi_build`] and is not used afterwards.
 */
void mh_thi_free(MhThi *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MANIFOLD_HERMITE_H */
