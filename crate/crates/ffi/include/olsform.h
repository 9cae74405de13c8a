#ifndef OLSFORM_H
#define OLSFORM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum OlsStatus {
  OLS_STATUS_OK = 0,
  OLS_STATUS_NULL_POINTER = 1,
  OLS_STATUS_DIMENSION = 2,
  OLS_STATUS_NON_FINITE = 3,
  OLS_STATUS_RANK_DEFICIENT = 4,
  OLS_STATUS_NOT_SYMMETRIC = 5,
  OLS_STATUS_SINGULAR_SYSTEM = 6,
  OLS_STATUS_INDEX_OUT_OF_RANGE = 7,
  OLS_STATUS_INSUFFICIENT_ROWS = 8,
  OLS_STATUS_INSUFFICIENT_SAMPLES = 9,
  OLS_STATUS_INVALID_ARGUMENT = 10,
  OLS_STATUS_PANIC = 11,
} OlsStatus;

/**
 * An orthogonal basis of a design matrix, reusable across responses.
 */
typedef struct OlsBasis OlsBasis;

/**
 * A dense column-major matrix.
 */
typedef struct OlsMatrix OlsMatrix;

/**
 * The left generalized inverse of a design matrix.
 */
typedef struct OlsPinv OlsPinv;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *ols_last_error_message(void);

/**
 * Static description of a status code.
 */
const char *ols_status_string(enum OlsStatus status);

/**
 * Copies `rows * cols` column-major values into a new matrix.
 *
 * # Safety
 * `data` must be valid for `rows * cols` reads; `out` must be writable.
 */
enum OlsStatus ols_matrix_new(size_t rows, size_t cols, const double *data, struct OlsMatrix **out);

/**
 * # Safety
 * `m` must be NULL or a handle from [`ols_matrix_new`] not yet freed.
 */
void ols_matrix_free(struct OlsMatrix *m);

/**
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t ols_matrix_rows(const struct OlsMatrix *m);

/**
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t ols_matrix_cols(const struct OlsMatrix *m);

/**
 * Least-squares fit. `beta` receives `cols + intercept` values, intercept
 * first; `rss` may be NULL.
 *
 * # Safety
 * `x` must be a live handle, `y` valid for `n` reads, `beta` for `beta_len`
 * writes, and `rss` NULL or writable.
 */
enum OlsStatus ols_fit(const struct OlsMatrix *x,
                       const double *y,
                       size_t n,
                       bool intercept,
                       double *beta,
                       size_t beta_len,
                       double *rss);

/**
 * Orthogonalizes the columns of `x`; `pivot_floor <= 0` selects the default.
 *
 * # Safety
 * `x` must be a live handle; `out` must be writable.
 */
enum OlsStatus ols_basis_new(const struct OlsMatrix *x, double pivot_floor, struct OlsBasis **out);

/**
 * # Safety
 * `b` must be NULL or a handle from [`ols_basis_new`] not yet freed.
 */
void ols_basis_free(struct OlsBasis *b);

/**
 * Coefficient `index` (1-based) for response `y`.
 *
 * # Safety
 * `b` must be a live handle, `y` valid for `n` reads, `out` writable.
 */
enum OlsStatus ols_basis_coeff(const struct OlsBasis *b,
                               size_t index,
                               const double *y,
                               size_t n,
                               double *out);

/**
 * All coefficients for response `y`.
 *
 * # Safety
 * `b` must be a live handle, `y` valid for `n` reads, `beta` for `beta_len`
 * writes.
 */
enum OlsStatus ols_basis_coeffs(const struct OlsBasis *b,
                                const double *y,
                                size_t n,
                                double *beta,
                                size_t beta_len);

/**
 * Left generalized inverse of the basis' design matrix.
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum OlsStatus ols_pinv_new(const struct OlsBasis *b, struct OlsPinv **out);

/**
 * # Safety
 * `p` must be NULL or a handle from [`ols_pinv_new`] not yet freed.
 */
void ols_pinv_free(struct OlsPinv *p);

/**
 * Copies the `p × n` inverse into `data`, column-major.
 *
 * # Safety
 * `p` must be a live handle and `data` valid for `len` writes.
 */
enum OlsStatus ols_pinv_copy(const struct OlsPinv *p, double *data, size_t len);

/**
 * Precision-matrix element `s^{ij}` (1-based).
 *
 * # Safety
 * `p` must be a live handle; `out` writable.
 */
enum OlsStatus ols_precision_element(const struct OlsPinv *p, size_t i, size_t j, double *out);

/**
 * Weighted coefficients for a symmetric `n × n` weight matrix `w`.
 *
 * # Safety
 * `x` and `w` must be live handles, `y` valid for `n` reads, `beta` for
 * `beta_len` writes.
 */
enum OlsStatus ols_weighted_coeffs(const struct OlsMatrix *x,
                                   const struct OlsMatrix *w,
                                   const double *y,
                                   size_t n,
                                   double *beta,
                                   size_t beta_len);

/**
 * Interaction coefficient and t-statistic for one locus pair.
 *
 * # Safety
 * `g_i`, `g_j` and `pheno` must be valid for `m` reads; `beta3` and `tstat`
 * writable.
 */
enum OlsStatus ols_interaction_stat(const double *g_i,
                                    const double *g_j,
                                    const double *pheno,
                                    size_t m,
                                    double *beta3,
                                    double *tstat);

/**
 * Permutation p-value for one locus pair, `n_perm` permutations from `seed`.
 *
 * # Safety
 * `g_i`, `g_j` and `pheno` must be valid for `m` reads; `out` writable.
 */
enum OlsStatus ols_permutation_pvalue(const double *g_i,
                                      const double *g_j,
                                      const double *pheno,
                                      size_t m,
                                      size_t n_perm,
                                      uint64_t seed,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OLSFORM_H */
