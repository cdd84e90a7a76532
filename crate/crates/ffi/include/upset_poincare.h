#ifndef UPSET_POINCARE_H
#define UPSET_POINCARE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  UP_STATUS_OK = 0,
  UP_STATUS_NULL_POINTER = 1,
  UP_STATUS_INVALID_ARGUMENT = 2,
  UP_STATUS_PARSE = 3,
  UP_STATUS_NOT_MONOTONE = 4,
  UP_STATUS_DIMENSION = 5,
  UP_STATUS_NUMERICAL = 6,
  UP_STATUS_VIOLATION = 7,
  UP_STATUS_PANIC = 8,
} UpStatus;

/**
 * Opaque handle to a monotone set.
 */
typedef struct UpMonotoneSet UpMonotoneSet;

typedef struct {
  uint32_t dim;
  uint64_t size;
  double density;
} UpSetInfo;

typedef struct {
  /**
   * Zero for a singleton.
   */
  double lambda2;
  /**
   * `2 / lambda2`, or zero for a singleton.
   */
  double cstar;
  double bound_fp;
  double bound_ours;
  double residual;
  bool iterative;
} UpSpectral;

typedef struct {
  uint64_t t_mix;
  /**
   * False when only the heuristic start set was scanned.
   */
  bool exhaustive;
  double gap;
  uint64_t bound_spectral;
  uint64_t bound_poincare;
} UpMixing;

typedef struct {
  double a0;
  double a1;
  double alpha;
  double beta;
  double gamma;
  double c;
} UpInductionParams;

typedef struct {
  double lhs;
  double rhs;
  bool holds;
} UpFivePoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Valid until the next
 * failing call on the same thread; never null.
 */
const char *up_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *up_version(void);

/**
 * Builds a set from a description such as `"threshold 5 3"` or
 * `"upset 3 011,101"`.
 */
UpStatus up_set_parse(const char *desc, UpMonotoneSet **out);

/**
 * `{x in {0,1}^n : |x| >= k}`.
 */
UpStatus up_set_threshold(uint32_t n, uint32_t k, UpMonotoneSet **out);

/**
 * Set from explicit member indices; fails with `NotMonotone` otherwise.
 */
UpStatus up_set_from_members(uint32_t n, const uint32_t *members, size_t len, UpMonotoneSet **out);

/**
 * Releases a handle. Null is ignored.
 */
void up_set_free(UpMonotoneSet *set);

UpStatus up_set_info(const UpMonotoneSet *set, UpSetInfo *out);

UpStatus up_set_contains(const UpMonotoneSet *set, uint64_t index, bool *out);

/**
 * Copies up to `cap` member indices (ascending) into `buf` and stores the
 * total member count in `len`. Pass `cap = 0` to query the count.
 */
UpStatus up_set_members(const UpMonotoneSet *set, uint32_t *buf, size_t cap, size_t *len);

/**
 * Restricted Dirichlet form of `values` (one per member, ascending index).
 */
UpStatus up_dirichlet_form(const UpMonotoneSet *set, const double *values, size_t len, double *out);

/**
 * Variance of `values` under the uniform law on the set.
 */
UpStatus up_variance(const UpMonotoneSet *set, const double *values, size_t len, double *out);

UpStatus up_poincare_constant(const UpMonotoneSet *set, UpSpectral *out);

/**
 * Worst-start mixing time and both bounds; requires `theta >= 1/2`.
 */
UpStatus up_exact_tmix(const UpMonotoneSet *set, double theta, double epsilon, UpMixing *out);

UpStatus up_five_point(const UpInductionParams *params, UpFivePoint *out);

/**
 * `B^2 - 4AC` of the induction quadratic.
 */
UpStatus up_discriminant(double a0, double a1, double c, double *out);

/**
 * `(u - s + 1)(u - t + 1) - 1`; `det G` is `a0^2 / 4` times this.
 */
UpStatus up_g_psd_margin(double a0, double a1, double *out);

/**
 * Number of nonempty monotone sets in dimension `n` (1..=5).
 */
UpStatus up_enumerate_count(uint32_t n, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UPSET_POINCARE_H */
