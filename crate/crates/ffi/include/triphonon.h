#ifndef TRIPHONON_H
#define TRIPHONON_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TpStatus {
  TP_STATUS_OK = 0,
  TP_STATUS_NULL_POINTER = 1,
  TP_STATUS_INVALID_ARGUMENT = 2,
  TP_STATUS_NUMERICAL = 3,
  TP_STATUS_PANIC = 4,
} TpStatus;

/**
 * Path family codes accepted by [`tp_run_berry`].
 */
typedef enum TpFamily {
  TP_FAMILY_CANONICAL = 0,
  TP_FAMILY_LARGER = 1,
  TP_FAMILY_SMALLER = 2,
  TP_FAMILY_WAVY = 3,
  TP_FAMILY_MULTI_LOOP = 4,
} TpFamily;

/**
 * Opaque model handle.
 */
typedef struct TpModel TpModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *tp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tp_version(void);

/**
 * Model with the fitted default parameters. Free with [`tp_model_free`].
 *
 * # Safety
 * `out` must be a valid pointer or NULL.
 */
enum TpStatus tp_model_default(struct TpModel **out);

/**
 * Model from f_R (kHz), Δf (kHz), c (1/mV) and α. Free with [`tp_model_free`].
 *
 * # Safety
 * `out` must be a valid pointer or NULL.
 */
enum TpStatus tp_model_create(double f_r_khz,
                              double delta_f_khz,
                              double c_per_mv,
                              double alpha,
                              struct TpModel **out);

/**
 * # Safety
 * `model` must come from `tp_model_create`/`tp_model_default` and not be freed twice. NULL is a no-op.
 */
void tp_model_free(struct TpModel *model);

/**
 * Sorted eigenvalues (units of Δk) into `values[3]`, and eigenvectors row-major
 * into `vectors[9]` (row j = band j+1, columns A, B, C). `vectors` may be NULL.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum TpStatus tp_eigensystem(const struct TpModel *model,
                             double s_a,
                             double s_b,
                             double *values,
                             double *vectors);

/**
 * Mode frequencies (kHz, ascending) at shim voltage `dv_a_mv` into `out[3]`.
 *
 * # Safety
 * `out` must be valid for 3 doubles.
 */
enum TpStatus tp_mode_frequencies(const struct TpModel *model, double dv_a_mv, double *out);

/**
 * Probability that a phonon prepared at `site` (0 = A, 1 = B, 2 = C) is found there after `t_ms`.
 *
 * # Safety
 * `out` must be valid.
 */
enum TpStatus tp_return_probability(const struct TpModel *model,
                                    double s_a,
                                    double s_b,
                                    double t_ms,
                                    uint32_t site,
                                    double *out);

/**
 * Discrete geometric phase (radians, 0 or π for a real band) of `band` (1..3)
 * around the closed loop given by `n` waypoints in `s_a`, `s_b`. The last
 * waypoint must repeat the first.
 *
 * # Safety
 * `s_a` and `s_b` must be valid for `n` doubles; `out` must be valid.
 */
enum TpStatus tp_discrete_berry_phase(const struct TpModel *model,
                                      const double *s_a,
                                      const double *s_b,
                                      size_t n,
                                      uint32_t band,
                                      double *out);

/**
 * Interferometric Berry measurement: builds the enclosing / non-enclosing pair
 * of `family` (a [`TpFamily`] code) with `waypoints` samples, runs each for `duration_ms`, and fits
 * the fringes. Writes |Δφ| (radians) and, if `populations` is non-NULL, the
 * final band populations as `[enc1, enc2, enc3, non1, non2, non3]`.
 *
 * # Safety
 * `delta_phi` must be valid; `populations` NULL or valid for 6 doubles.
 */
enum TpStatus tp_run_berry(const struct TpModel *model,
                           uint32_t family,
                           double duration_ms,
                           size_t waypoints,
                           double *delta_phi,
                           double *populations);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRIPHONON_H */
