#ifndef STV_MANIP_H
#define STV_MANIP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  STV_STATUS_OK = 0,
  STV_STATUS_NULL_POINTER = 1,
  STV_STATUS_INVALID_ARGUMENT = 2,
  STV_STATUS_PARSE_ERROR = 3,
  STV_STATUS_EMPTY_ELECTION = 4,
  STV_STATUS_BUFFER_TOO_SMALL = 5,
  STV_STATUS_INTERNAL = 6,
} StvStatus;

typedef enum {
  STV_DISTRIBUTION_IC = 0,
  STV_DISTRIBUTION_URN = 1,
  STV_DISTRIBUTION_RESAMPLE_NASA = 2,
  STV_DISTRIBUTION_RESAMPLE_HIRING = 3,
} StvDistribution;

typedef enum {
  /**
   * Highest index is eliminated first.
   */
  STV_TIE_RULE_MAX_INDEX = 0,
  /**
   * Fixed pseudo-random order derived from the seed.
   */
  STV_TIE_RULE_RANDOM = 1,
} StvTieRule;

typedef enum {
  STV_DECISION_MANIPULABLE = 0,
  STV_DECISION_NOT_MANIPULABLE = 1,
  STV_DECISION_LIMIT_EXCEEDED = 2,
} StvDecision;

/**
 * Opaque vote profile.
 */
typedef struct StvProfile StvProfile;

/**
 * Opaque manipulation search result.
 */
typedef struct StvSearchResult StvSearchResult;

typedef struct {
  double a;
  double b;
  double r2;
} StvFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into this library from the same thread.
 */
const char *stv_last_error(void);

/**
 * Parses profile text (`m=<count>` header, then `<weight>: a>b>c` lines).
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
StvStatus stv_profile_parse(const char *text, StvProfile **out);

/**
 * Draws `n` ballots over `m` candidates. `b` is only read for `Urn`.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
StvStatus stv_profile_sample(StvDistribution dist,
                             size_t m,
                             size_t n,
                             double b,
                             uint64_t seed,
                             StvProfile **out);

/**
 * # Safety
 * `profile` must come from this library and not be used afterwards. NULL is
 * ignored.
 */
void stv_profile_free(StvProfile *profile);

/**
 * Number of candidates, 0 for NULL.
 *
 * # Safety
 * `profile` must be NULL or a live handle.
 */
size_t stv_profile_candidates(const StvProfile *profile);

/**
 * Total ballot weight, 0 for NULL.
 *
 * # Safety
 * `profile` must be NULL or a live handle.
 */
uint64_t stv_profile_total_weight(const StvProfile *profile);

/**
 * Serializes a profile. Release the string with [`stv_string_free`].
 *
 * # Safety
 * `profile` must be a live handle and `out` a writable pointer.
 */
StvStatus stv_profile_to_string(const StvProfile *profile, char **out);

/**
 * # Safety
 * `s` must come from this library. NULL is ignored.
 */
void stv_string_free(char *s);

/**
 * Runs the election and stores the winner in `winner`.
 *
 * # Safety
 * `profile` must be a live handle and `winner` writable.
 */
StvStatus stv_winner(const StvProfile *profile,
                     StvTieRule tie,
                     uint64_t tie_seed,
                     uint32_t *winner);

/**
 * Searches for one extra ballot of weight `weight` that elects `preferred`
 * when added to `fixed`. `max_nodes` of 0 means unlimited.
 *
 * # Safety
 * `fixed` must be a live handle and `out` writable.
 */
StvStatus stv_manipulate(const StvProfile *fixed,
                         uint64_t weight,
                         uint32_t preferred,
                         StvTieRule tie,
                         uint64_t tie_seed,
                         uint64_t max_nodes,
                         StvSearchResult **out);

/**
 * # Safety
 * `result` must be a live handle.
 */
StvDecision stv_result_decision(const StvSearchResult *result);

/**
 * # Safety
 * `result` must be a live handle.
 */
uint64_t stv_result_nodes(const StvSearchResult *result);

/**
 * Copies the witness ranking into `buf`. `len` receives the ranking length,
 * 0 when there is no witness. Returns `BufferTooSmall` if `cap < *len`.
 *
 * # Safety
 * `result` must be a live handle, `len` writable and `buf` valid for `cap`
 * elements (may be NULL when `cap` is 0).
 */
StvStatus stv_result_witness(const StvSearchResult *result, uint32_t *buf, size_t cap, size_t *len);

/**
 * # Safety
 * `result` must come from this library and not be used afterwards. NULL is
 * ignored.
 */
void stv_result_free(StvSearchResult *result);

/**
 * Least-squares fit of `y = a * b^m` in log space.
 *
 * # Safety
 * `m` and `y` must be valid for `len` elements and `out` writable.
 */
StvStatus stv_fit_exponential(const double *m, const double *y, size_t len, StvFit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STV_MANIP_H */
