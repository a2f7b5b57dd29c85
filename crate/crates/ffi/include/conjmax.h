#ifndef CONJMAX_H
#define CONJMAX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum CmStatus {
  CM_STATUS_OK = 0,
  CM_STATUS_NULL_POINTER = 1,
  CM_STATUS_INVALID_ARGUMENT = 2,
  CM_STATUS_PARSE = 3,
  CM_STATUS_DIMENSION_MISMATCH = 4,
  CM_STATUS_OUT_OF_RANGE = 5,
  CM_STATUS_RESOLUTION_TOO_LOW = 6,
  CM_STATUS_NOT_REAL = 7,
  CM_STATUS_ZERO_POLYNOMIAL = 8,
  CM_STATUS_OUTSIDE_POLYDISK = 9,
  CM_STATUS_CAP_HIT = 10,
  CM_STATUS_INVALID_UTF8 = 11,
  CM_STATUS_PANIC = 12,
} CmStatus;

/**
 * Opaque polynomial handle.
 */
typedef struct CmTrigPoly CmTrigPoly;

/**
 * Result of [`cm_weak_type_ratio`].
 */
typedef struct CmWeakRatio {
  size_t dim;
  size_t res;
  double l1;
  double weak_l1_of_m;
  double ratio;
} CmWeakRatio;

/**
 * Result of [`cm_simulate_exit`].
 */
typedef struct CmExit {
  double tau;
  double exit_re;
  double exit_im;
  size_t n_samples;
} CmExit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *cm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cm_version(void);

/**
 * Parses the text format (`dim N` line followed by `m_1 .. m_N re im` lines).
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CmStatus cm_poly_parse(const char *text, struct CmTrigPoly **out);

/**
 * Builds a polynomial from `n_terms` frequency vectors stored row by row in
 * `freqs` (`n_terms * dim` entries) and coefficient parts `re`, `im`.
 * Repeated frequencies are summed.
 *
 * # Safety
 * The arrays must hold the stated number of elements; `out` must be writable.
 */
enum CmStatus cm_poly_from_terms(size_t dim,
                                 size_t n_terms,
                                 const int32_t *freqs,
                                 const double *re,
                                 const double *im,
                                 struct CmTrigPoly **out);

/**
 * Seeded random real polynomial with `|m_j| <= max_degree`.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum CmStatus cm_poly_random_real(size_t dim,
                                  uint32_t max_degree,
                                  uint64_t seed,
                                  bool zero_mean,
                                  struct CmTrigPoly **out);

/**
 * Releases a handle. Null is accepted and ignored.
 *
 * # Safety
 * `p` must come from this library and must not be used afterwards.
 */
void cm_poly_free(struct CmTrigPoly *p);

/**
 * Number of variables, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t cm_poly_dim(const struct CmTrigPoly *p);

/**
 * Number of stored terms, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t cm_poly_num_terms(const struct CmTrigPoly *p);

/**
 * Harmonic extension at the polydisk point `(re[k] + i im[k])_k`; `n` must
 * equal the dimension.
 *
 * # Safety
 * `re`, `im` must hold `n` values; `out_re`, `out_im` must be writable.
 */
enum CmStatus cm_poly_evaluate(const struct CmTrigPoly *p,
                               const double *re,
                               const double *im,
                               size_t n,
                               double *out_re,
                               double *out_im);

/**
 * Text form of the polynomial; release it with [`cm_string_free`].
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CmStatus cm_poly_to_text(const struct CmTrigPoly *p, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from [`cm_poly_to_text`] and must not be used afterwards.
 */
void cm_string_free(char *s);

/**
 * `E(p | F_n)` for `0 <= n <= dim`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CmStatus cm_poly_cond_expect(const struct CmTrigPoly *p, size_t n, struct CmTrigPoly **out);

/**
 * Martingale difference `d_j p` for `0 <= j <= dim`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CmStatus cm_poly_mart_diff(const struct CmTrigPoly *p, size_t j, struct CmTrigPoly **out);

/**
 * One-variable conjugate `H_j p` for `1 <= j <= dim`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CmStatus cm_poly_conjugate_j(const struct CmTrigPoly *p, size_t j, struct CmTrigPoly **out);

/**
 * Conjugate function `H p`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CmStatus cm_poly_conjugate_h(const struct CmTrigPoly *p, struct CmTrigPoly **out);

/**
 * `p + i H p`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CmStatus cm_poly_analytic_completion(const struct CmTrigPoly *p, struct CmTrigPoly **out);

/**
 * Product of two polynomials of equal dimension.
 *
 * # Safety
 * `a`, `b` must be live handles and `out` writable.
 */
enum CmStatus cm_poly_multiply(const struct CmTrigPoly *a,
                               const struct CmTrigPoly *b,
                               struct CmTrigPoly **out);

/**
 * Whether the spectrum lies in the half-space `O`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CmStatus cm_poly_is_analytic(const struct CmTrigPoly *p, bool *out);

/**
 * `||M p||*_1 / ||p||_1` on the `res^dim` grid for real nonzero `p`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CmStatus cm_weak_type_ratio(const struct CmTrigPoly *p, size_t res, struct CmWeakRatio *out);

/**
 * Simulates one complex Brownian motion from 0 until it leaves the unit disk.
 *
 * # Safety
 * `out` must be writable.
 */
enum CmStatus cm_simulate_exit(uint64_t seed, double dt, double t_cap, struct CmExit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONJMAX_H */
