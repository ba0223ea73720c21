#ifndef ELLIPTIC_LAB_H
#define ELLIPTIC_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ElStatus {
  EL_STATUS_OK = 0,
  EL_STATUS_NULL_POINTER = 1,
  EL_STATUS_INVALID_ARGUMENT = 2,
  EL_STATUS_NON_CONVERGENCE = 3,
  EL_STATUS_SINGULAR = 4,
  EL_STATUS_UNSUPPORTED = 5,
  EL_STATUS_TOO_LARGE = 6,
  EL_STATUS_IO = 7,
  EL_STATUS_BUFFER_TOO_SMALL = 8,
  EL_STATUS_PANIC = 9,
} ElStatus;

/**
 * Opaque handle to a dense complex matrix.
 */
typedef struct ElMatrix ElMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t el_last_error_message(char *buf, size_t len);

/**
 * NUL-terminated library version.
 */
const char *el_version(void);

/**
 * Builds an n x n matrix from row-major real and imaginary parts. `im` may be null.
 *
 * # Safety
 * `re` (and `im` when non-null) must be valid for n*n reads; `out` must be writable.
 */
enum ElStatus el_matrix_from_parts(size_t n,
                                   const double *re,
                                   const double *im,
                                   struct ElMatrix **out);

/**
 * Generates trial `trial` of the ensemble described by `spec_json`
 * (fields n, pair, optional diagonal and perturbation, seed). The matrix is unscaled.
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string; `out` must be writable.
 */
enum ElStatus el_matrix_generate(const char *spec_json, uint64_t trial, struct ElMatrix **out);

/**
 * Frees a handle; null is ignored.
 *
 * # Safety
 * `m` must be null or a handle from this library that was not yet freed.
 */
void el_matrix_free(struct ElMatrix *m);

/**
 * # Safety
 * `m` must be a live handle and `n` writable.
 */
enum ElStatus el_matrix_order(const struct ElMatrix *m, size_t *n);

/**
 * # Safety
 * `m` must be a live handle; `re` and `im` writable.
 */
enum ElStatus el_matrix_get(const struct ElMatrix *m, size_t i, size_t j, double *re, double *im);

/**
 * Eigenvalues of `m` scaled by `scale` (pass 1/sqrt(n) for the ESD
 * normalization). Buffers need room for n values.
 *
 * # Safety
 * `m` must be a live handle; `re` and `im` valid for `len` writes.
 */
enum ElStatus el_eigenvalues(const struct ElMatrix *m,
                             double scale,
                             double *re,
                             double *im,
                             size_t len);

/**
 * Singular values of `m` scaled by `scale`, in decreasing order.
 *
 * # Safety
 * `m` must be a live handle; `out` valid for `len` writes.
 */
enum ElStatus el_singular_values(const struct ElMatrix *m, double scale, double *out, size_t len);

/**
 * Fraction of the points (re[k], im[k]) inside the elliptic-law support for
 * real `rho`, inflated by `inflation`.
 *
 * # Safety
 * `re` and `im` must be valid for `count` reads; `out` writable.
 */
enum ElStatus el_inside_fraction(const double *re,
                                 const double *im,
                                 size_t count,
                                 double rho,
                                 double inflation,
                                 double *out);

/**
 * Solves the (s, t, u) system at (rho, z, alpha). `out` receives
 * s, t, u as six doubles (re, im interleaved).
 *
 * # Safety
 * `out` must be valid for `len` writes.
 */
enum ElStatus el_solve_stu(double rho,
                           double z_re,
                           double z_im,
                           double alpha_re,
                           double alpha_im,
                           double *out,
                           size_t len);

/**
 * Exact small-ball probability for a JSON query (fields a, optional b, f,
 * f2, atom, beta). `exact` is set to 0 when only the 2-approximation was used.
 *
 * # Safety
 * `query_json` must be a NUL-terminated string; `gamma` and `exact` writable.
 */
enum ElStatus el_small_ball_exact(const char *query_json, double *gamma, int32_t *exact);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELLIPTIC_LAB_H */
