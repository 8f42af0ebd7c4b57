#ifndef FRACSIEVE_H
#define FRACSIEVE_H

/* Generated by cbindgen from fracsieve-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  FS_OK = 0,
  FS_ERR_NULL_POINTER = 1,
  FS_ERR_UTF8 = 2,
  FS_ERR_INVALID_ARGUMENT = 3,
  FS_ERR_DOMAIN = 4,
  FS_ERR_CAPACITY = 5,
  FS_ERR_EMPTY_SURVIVORS = 6,
  FS_ERR_INTERNAL = 7,
} FsStatus;

/**
 * Opaque witness-certificate handle.
 */
typedef struct FsCertificate FsCertificate;

/**
 * Opaque parameter-system handle.
 */
typedef struct FsParams FsParams;

/**
 * Opaque growth-sequence handle.
 */
typedef struct FsSequence FsSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Most recent error message on this thread, or NULL. Free the result with
 * `fs_string_free`.
 */
char *fs_last_error_message(void);

/**
 * Free a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must have been returned by a `fracsieve` FFI call and not yet freed.
 */
void fs_string_free(char *s);

/**
 * Parse a sequence spec (`poly:1,0,0` or `power:gamma=3/2,eps1=1`) with the
 * given domain start `n_min` (use 2 when unsure).
 *
 * # Safety
 * `spec` must be a valid NUL-terminated string; `out` must be a valid
 * pointer to receive the handle.
 */
FsStatus fs_sequence_parse(const char *spec, uint64_t n_min, FsSequence **out);

/**
 * # Safety
 * `seq` must be a handle from `fs_sequence_parse`, freed at most once.
 */
void fs_sequence_free(FsSequence *seq);

/**
 * Midpoint of `t_n` as a double (exact values convert exactly when they fit).
 *
 * # Safety
 * `seq` must be a live sequence handle; `out` a valid pointer.
 */
FsStatus fs_sequence_eval_f64(const FsSequence *seq, uint64_t n, double *out);

/**
 * New parameter system for the growth exponent `gamma` (rational text like
 * `"2"` or `"3/2"`), defaulting to the standard constant and effective gaps.
 *
 * # Safety
 * `gamma` must be a valid string; `out` a valid pointer.
 */
FsStatus fs_params_new(const char *gamma, FsParams **out);

/**
 * # Safety
 * `params` must be a handle from `fs_params_new`, freed at most once.
 */
void fs_params_free(FsParams *params);

/**
 * Replace the constant `c` (rational text); switches to custom mode.
 *
 * # Safety
 * `params` must be a live handle; `c` a valid string.
 */
FsStatus fs_params_set_custom_c(FsParams *params, const char *c);

/**
 * Select the gap-function mode: 0 = effective (default), 1 = closed-form.
 *
 * # Safety
 * `params` must be a live handle.
 */
FsStatus fs_params_set_h_mode(FsParams *params, int32_t paper);

/**
 * # Safety
 * `params` must be a live handle.
 */
FsStatus fs_params_set_n_start(FsParams *params, uint64_t n_start);

/**
 * `c = 60·ln(2 + 1/gamma)` as a double; NaN on domain error.
 */
double fs_c_of_gamma(double gamma);

/**
 * Certified bounds on `delta_n = 1/(c·n·ln n)`.
 *
 * # Safety
 * `params` must be a live handle; `lo`/`hi` valid pointers.
 */
FsStatus fs_params_delta(const FsParams *params, uint64_t n, double *lo, double *hi);

/**
 * Dyadic level `l_n`.
 *
 * # Safety
 * Handles must be live; `out` a valid pointer.
 */
FsStatus fs_dyadic_level(const FsParams *params, const FsSequence *seq, uint64_t n, uint32_t *out);

/**
 * Effective gap `h_eff(n) = min{m > n : t_m/t_n >= 1/delta_n}`.
 *
 * # Safety
 * Handles must be live; `out` a valid pointer.
 */
FsStatus fs_h_effective(const FsParams *params, const FsSequence *seq, uint64_t n, uint64_t *out);

/**
 * Sieve `[n_from, n_to]` in a window, extract a witness, and certify it.
 * `window` is `"auto"` or `"level:index"`; `strategy` is `leftmost`,
 * `max-run`, or `seeded-random`.
 *
 * # Safety
 * Handles must be live; strings valid; `out` a valid pointer.
 */
FsStatus fs_witness_run(const FsSequence *seq,
                        const FsParams *params,
                        const char *window,
                        uint64_t n_from,
                        uint64_t n_to,
                        const char *strategy,
                        uint64_t seed,
                        FsCertificate **out);

/**
 * Certify a supplied `alpha = num/2^level` over `[n_from, n_to]`.
 * `num` is decimal text (arbitrary size).
 *
 * # Safety
 * Handles must be live; `num` a valid string; `out` a valid pointer.
 */
FsStatus fs_certify(const FsSequence *seq,
                    const FsParams *params,
                    const char *num,
                    uint32_t level,
                    uint64_t n_from,
                    uint64_t n_to,
                    FsCertificate **out);

/**
 * 1 if the certificate's verdict is true, 0 if false, -1 on a null handle.
 *
 * # Safety
 * `cert` must be a live certificate handle or NULL.
 */
int32_t fs_certificate_verdict(const FsCertificate *cert);

/**
 * Lower bound on the minimal score `n·ln n·‖α·t_n‖` over the range.
 *
 * # Safety
 * `cert` must be a live handle; `out` a valid pointer.
 */
FsStatus fs_certificate_min_score(const FsCertificate *cert, double *out);

/**
 * Witness numerator as decimal text (free with `fs_string_free`) and its
 * dyadic level.
 *
 * # Safety
 * `cert` must be a live handle; out-pointers valid.
 */
FsStatus fs_certificate_alpha(const FsCertificate *cert, char **num_out, uint32_t *level_out);

/**
 * Whole certificate as JSON (free with `fs_string_free`).
 *
 * # Safety
 * `cert` must be a live handle; `out` a valid pointer.
 */
FsStatus fs_certificate_to_json(const FsCertificate *cert, char **out);

/**
 * # Safety
 * `cert` must be a handle from a certify call, freed at most once.
 */
void fs_certificate_free(FsCertificate *cert);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACSIEVE_H */
