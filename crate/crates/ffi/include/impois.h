#ifndef IMPOIS_H
#define IMPOIS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stdint.h>
#include <stddef.h>

typedef enum ImpoisStatus {
  IMPOIS_STATUS_OK = 0,
  IMPOIS_STATUS_INVALID_ARGUMENT = 1,
  IMPOIS_STATUS_NULL_POINTER = 2,
  IMPOIS_STATUS_ORDERING_STOPPED = 3,
  IMPOIS_STATUS_NOT_IN_SUPPORT = 4,
  IMPOIS_STATUS_EMPTY_LEVEL_SET = 5,
  IMPOIS_STATUS_NO_CONVERGENCE = 6,
  IMPOIS_STATUS_BUFFER_TOO_SMALL = 7,
  IMPOIS_STATUS_INTERNAL = 8,
  IMPOIS_STATUS_PANIC = 9,
} ImpoisStatus;

typedef enum ImpoisSide {
  // The assertion `theta > theta0`.
  IMPOIS_SIDE_GREATER = 0,
  // The assertion `theta <= theta0`.
  IMPOIS_SIDE_LESS_EQUAL = 1,
} ImpoisSide;

// Opaque ranking handle. Free with [`impois_ranking_free`].
typedef struct ImpoisRanking ImpoisRanking;

typedef struct ImpoisBelief {
  double belief;
  double plausibility;
} ImpoisBelief;

typedef struct ImpoisInterval {
  double lower;
  double upper;
  bool contiguous;
} ImpoisInterval;

typedef struct ImpoisLambdaInterval {
  double lower;
  double upper;
  double conflict_mass;
  bool contiguous;
} ImpoisLambdaInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *impois_last_error(void);

// # Safety
// `out` must be null or valid for writes.
enum ImpoisStatus impois_poisson_pmf(uint64_t x, double theta, double *out);

// `P(X <= x)`; `x < 0` gives 0.
//
// # Safety
// `out` must be null or valid for writes.
enum ImpoisStatus impois_poisson_cdf(int64_t x, double theta, double *out);

// Regularized lower incomplete gamma `G_a(theta)`.
//
// # Safety
// `out` must be null or valid for writes.
enum ImpoisStatus impois_gamma_cdf(double a, double theta, double *out);

// # Safety
// `out` must be null or valid for writes.
enum ImpoisStatus impois_one_sided(uint64_t x,
                                   double theta0,
                                   enum ImpoisSide side,
                                   struct ImpoisBelief *out);

// # Safety
// `out` must be null or valid for writes.
enum ImpoisStatus impois_ranking_new(double theta0, double epsilon, struct ImpoisRanking **out);

// # Safety
// `ranking` must be null or a handle from [`impois_ranking_new`] not yet freed.
void impois_ranking_free(struct ImpoisRanking *ranking);

// Number of ranked points.
//
// # Safety
// `ranking` must be a live handle; `out` must be null or valid for writes.
enum ImpoisStatus impois_ranking_len(const struct ImpoisRanking *ranking, size_t *out);

// Copies the points in rank order into `buf`, which must hold at least
// `impois_ranking_len` entries.
//
// # Safety
// `ranking` must be a live handle; `buf` must be valid for `cap` writes.
enum ImpoisStatus impois_ranking_support(const struct ImpoisRanking *ranking,
                                         uint64_t *buf,
                                         size_t cap);

// 1-based rank of `x`; points beyond the truncation get `len + 1`.
//
// # Safety
// `ranking` must be a live handle; `out` must be null or valid for writes.
enum ImpoisStatus impois_ranking_rank(const struct ImpoisRanking *ranking, uint64_t x, size_t *out);

// Cumulative `T(r)` and `V(r)` along the ranking. Both buffers must hold
// `impois_ranking_len` entries.
//
// # Safety
// `ranking` must be a live handle; `t` and `v` must be valid for `cap` writes.
enum ImpoisStatus impois_ranking_diagnostics(const struct ImpoisRanking *ranking,
                                             double *t,
                                             double *v,
                                             size_t cap);

// Plausibility of `{theta0}` given `x`.
//
// # Safety
// `out` must be null or valid for writes.
enum ImpoisStatus impois_point_plausibility(uint64_t x, double theta0, double epsilon, double *out);

// # Safety
// `out` must be null or valid for writes.
enum ImpoisStatus impois_plausibility_interval(uint64_t x,
                                               double alpha,
                                               double epsilon,
                                               struct ImpoisInterval *out);

// # Safety
// `out` must be null or valid for writes.
enum ImpoisStatus impois_conflict_mass(uint64_t x, double beta, double epsilon, double *out);

// # Safety
// `out` must be null or valid for writes.
enum ImpoisStatus impois_ebsb_plausibility(uint64_t x,
                                           double theta0,
                                           double beta,
                                           double epsilon,
                                           double *out);

// Interval for the signal `lambda = theta - beta`.
//
// # Safety
// `out` must be null or valid for writes.
enum ImpoisStatus impois_lambda_interval(uint64_t x,
                                         double beta,
                                         double alpha,
                                         double epsilon,
                                         struct ImpoisLambdaInterval *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IMPOIS_H */
