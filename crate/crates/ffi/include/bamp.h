#ifndef BAMP_H
#define BAMP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum BampStatus {
  BAMP_STATUS_OK = 0,
  BAMP_STATUS_NULL_POINTER = 1,
  BAMP_STATUS_INVALID_ARGUMENT = 2,
  BAMP_STATUS_DIMENSION_MISMATCH = 3,
  /**
   * No exact evaluation exists; use Monte Carlo.
   */
  BAMP_STATUS_USE_MONTE_CARLO = 4,
  BAMP_STATUS_PARSE = 5,
  BAMP_STATUS_NUMERICAL = 6,
  BAMP_STATUS_PANIC = 7,
} BampStatus;

/**
 * Opaque copula handle.
 */
typedef struct BampCopula BampCopula;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *bamp_last_error(void);

/**
 * Build a copula from a TOML table, e.g.
 * `family = "homogeneous-gauss"\nrho = 0.5\ndim = 3`.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a writable pointer.
 */
enum BampStatus bamp_copula_from_toml(const char *toml, struct BampCopula **out);

/**
 * Release a handle. Null is ignored.
 *
 * # Safety
 * `c` must come from [`bamp_copula_from_toml`] and not be freed twice.
 */
void bamp_copula_free(struct BampCopula *c);

/**
 * Dimension of the copula, 0 for a null handle.
 *
 * # Safety
 * `c` must be null or a live handle.
 */
uintptr_t bamp_copula_dim(const struct BampCopula *c);

/**
 * `C(u)`.
 *
 * # Safety
 * `point` must hold `len` doubles; `out` must be writable.
 */
enum BampStatus bamp_copula_cdf(const struct BampCopula *c,
                                const double *point,
                                uintptr_t len,
                                double *out);

/**
 * `P(U_1 > 1 − u_1, …)`, i.e. the joint probability that every selected
 * indicator is 1 when `u` holds the marginal probabilities.
 *
 * # Safety
 * `point` must hold `len` doubles; `out` must be writable.
 */
enum BampStatus bamp_copula_survival_cdf(const struct BampCopula *c,
                                         const double *point,
                                         uintptr_t len,
                                         double *out);

/**
 * Draw `n_rows` rows into `out` (`n_rows × dim`, row-major).
 *
 * # Safety
 * `out` must hold `out_len` doubles.
 */
enum BampStatus bamp_copula_sample(const struct BampCopula *c,
                                   uintptr_t n_rows,
                                   uint64_t seed,
                                   double *out,
                                   uintptr_t out_len);

/**
 * Ampute an `n × d` matrix with iid rows from `c`. `probs` is `n × d`;
 * `mask_out` receives 1 for missing cells and 0 otherwise.
 *
 * # Safety
 * `data`, `probs` and `mask_out` must each hold `n * d` elements.
 */
enum BampStatus bamp_ampute_rows_iid(const struct BampCopula *c,
                                     const double *data,
                                     const double *probs,
                                     uintptr_t n,
                                     uintptr_t d,
                                     uint64_t seed,
                                     uint8_t *mask_out);

/**
 * Correlation of two indicators with marginal probabilities `p1`, `p2`
 * joined by the bivariate copula `c`.
 *
 * # Safety
 * `out` must be writable.
 */
enum BampStatus bamp_pairwise_correlation(const struct BampCopula *c,
                                          double p1,
                                          double p2,
                                          double *out);

/**
 * Attainable correlation range of two indicators.
 *
 * # Safety
 * `lo` and `hi` must be writable.
 */
enum BampStatus bamp_correlation_bounds(double p1, double p2, double *lo, double *hi);

/**
 * Logistic coefficients whose probabilities span `[p − eps, p + eps]`
 * over covariates in `[cmin, cmax]`, with `k` covariates.
 *
 * # Safety
 * `beta0` and `beta` must be writable.
 */
enum BampStatus bamp_implied_coefficients(double p,
                                          double eps,
                                          double cmin,
                                          double cmax,
                                          uintptr_t k,
                                          double *beta0,
                                          double *beta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BAMP_H */
