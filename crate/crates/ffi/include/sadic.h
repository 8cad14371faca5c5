#ifndef SADIC_H
#define SADIC_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum SadicStatus {
  SADIC_STATUS_OK = 0,
  SADIC_STATUS_INVALID_ARGUMENT = 1,
  SADIC_STATUS_PARSE = 2,
  /**
   * Precision ran out before a comparison was decided.
   */
  SADIC_STATUS_INDETERMINATE = 3,
  SADIC_STATUS_INFEASIBLE = 4,
  SADIC_STATUS_IO = 5,
  SADIC_STATUS_VERIFICATION_FAILED = 6,
  SADIC_STATUS_INTERNAL = 7,
} SadicStatus;

/**
 * A parameter basis.
 */
typedef struct SadicBasis SadicBasis;

/**
 * A Gamma module.
 */
typedef struct SadicGamma SadicGamma;

/**
 * A generating sequence with its recorded measures.
 */
typedef struct SadicSystem SadicSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on this thread.
 */
const char *sadic_last_error(void);

/**
 * Static name of a status code.
 */
const char *sadic_status_name(enum SadicStatus status);

/**
 * Library version, static.
 */
const char *sadic_version(void);

/**
 * Parses a basis file's text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` writable.
 */
enum SadicStatus sadic_basis_parse(const char *text_in, struct SadicBasis **out);

/**
 * Basis `1, sqrt(p_1), .., sqrt(p_len)`.
 *
 * # Safety
 * `primes` must point to `len` integers and `out` be writable.
 */
enum SadicStatus sadic_basis_sqrt_primes(const uint64_t *primes,
                                         size_t len,
                                         struct SadicBasis **out);

/**
 * Number of basis entries, the constant included; 0 for null.
 *
 * # Safety
 * `basis` must be null or a live handle.
 */
size_t sadic_basis_len(const struct SadicBasis *basis);

/**
 * # Safety
 * `basis` must be null or a handle not yet freed.
 */
void sadic_basis_free(struct SadicBasis *basis);

/**
 * Binary Toeplitz construction from comma-separated basis entry names.
 *
 * # Safety
 * Pointers must be live; `params` NUL-terminated; `out` writable.
 */
enum SadicStatus sadic_construct_toe(const struct SadicBasis *basis,
                                     const char *params,
                                     size_t levels,
                                     struct SadicSystem **out);

/**
 * `n`-letter construction from comma-separated parameter expressions.
 *
 * # Safety
 * Pointers must be live; `params` NUL-terminated; `out` writable.
 */
enum SadicStatus sadic_construct_rank(const struct SadicBasis *basis,
                                      size_t n,
                                      const char *params,
                                      size_t levels,
                                      struct SadicSystem **out);

/**
 * Reads GSQ text.
 *
 * # Safety
 * `gsq` must be NUL-terminated and `out` writable.
 */
enum SadicStatus sadic_system_read_gsq(const char *gsq, struct SadicSystem **out);

/**
 * Writes GSQ text into `*out`; release it with [`sadic_string_free`].
 *
 * # Safety
 * `system` must be live and `out` writable.
 */
enum SadicStatus sadic_system_write_gsq(const struct SadicSystem *system, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void sadic_string_free(char *s);

/**
 * First and last level numbers.
 *
 * # Safety
 * `system` must be live; outputs writable.
 */
enum SadicStatus sadic_system_levels(const struct SadicSystem *system, size_t *first, size_t *last);

/**
 * Number of words at `level`.
 *
 * # Safety
 * `system` must be live; `out` writable.
 */
enum SadicStatus sadic_system_word_count(const struct SadicSystem *system,
                                         size_t level,
                                         size_t *out);

/**
 * Runs the verifier named by the system's engine header. Counts go to the
 * optional outputs; the status is `VERIFICATION_FAILED` on any failed check
 * and `INDETERMINATE` when checks only ran out of precision.
 * `precision_bits` 0 selects the default.
 *
 * # Safety
 * Handles must be live; each output null or writable.
 */
enum SadicStatus sadic_system_verify(const struct SadicSystem *system,
                                     const struct SadicBasis *basis,
                                     uint32_t precision_bits,
                                     size_t *passed,
                                     size_t *failed,
                                     size_t *unverifiable);

/**
 * # Safety
 * `system` must be null or a handle not yet freed.
 */
void sadic_system_free(struct SadicSystem *system);

/**
 * Gamma module spanned by `1` and the measures of levels up to `depth`
 * (clamped to the last level).
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum SadicStatus sadic_gamma_from_system(const struct SadicSystem *system,
                                         const struct SadicBasis *basis,
                                         size_t depth,
                                         struct SadicGamma **out);

/**
 * Q-dimension of the module; 0 for null.
 *
 * # Safety
 * `gamma` must be null or live.
 */
size_t sadic_gamma_dimension(const struct SadicGamma *gamma);

/**
 * Whether the modules agree up to a coordinate permutation. When `perm`
 * is non-null and the answer is yes, the permutation (length `K`) is
 * written there.
 *
 * # Safety
 * Handles live; `equivalent` writable; `perm` null or room for `K` entries.
 */
enum SadicStatus sadic_gamma_orbit_equivalent(const struct SadicGamma *a,
                                              const struct SadicGamma *b,
                                              bool *equivalent,
                                              size_t *perm);

/**
 * # Safety
 * `gamma` must be null or a handle not yet freed.
 */
void sadic_gamma_free(struct SadicGamma *gamma);

/**
 * Whether `span{x.., 1} = span{y.., 1}` for comma-separated expressions.
 *
 * # Safety
 * Pointers live and NUL-terminated; `equivalent` writable.
 */
enum SadicStatus sadic_fn_equivalent(const struct SadicBasis *basis,
                                     const char *xs,
                                     const char *ys,
                                     bool *equivalent);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SADIC_H */
