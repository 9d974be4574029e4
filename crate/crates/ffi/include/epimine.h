#ifndef EPIMINE_H
#define EPIMINE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EpimineStatus {
  EPIMINE_STATUS_OK = 0,
  EPIMINE_STATUS_NULL_POINTER = 1,
  EPIMINE_STATUS_INVALID_UTF8 = 2,
  EPIMINE_STATUS_PARSE = 3,
  EPIMINE_STATUS_DOMAIN = 4,
  EPIMINE_STATUS_IO = 5,
  EPIMINE_STATUS_CAPACITY = 6,
  EPIMINE_STATUS_CONFLICT = 7,
  EPIMINE_STATUS_UNKNOWN_LABEL = 8,
  EPIMINE_STATUS_PANIC = 9,
} EpimineStatus;

/**
 * Frequent episodes from one mining run.
 */
typedef struct EpimineResult EpimineResult;

/**
 * An event sequence.
 */
typedef struct EpimineSequence EpimineSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into this library from the same thread.
 */
const char *epimine_last_error(void);

/**
 * Parses `label,time` lines.
 *
 * # Safety
 * `csv` must be a nul-terminated string; `out` must be writable.
 */
enum EpimineStatus epimine_sequence_from_csv(const char *csv, struct EpimineSequence **out);

/**
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum EpimineStatus epimine_sequence_from_file(const char *path, struct EpimineSequence **out);

/**
 * Simulates a network. `params_json` holds simulator parameters (missing
 * fields take defaults) and may be null; `preset` names embedded patterns
 * and may be null.
 *
 * # Safety
 * Non-null strings must be nul-terminated; `out` must be writable.
 */
enum EpimineStatus epimine_simulate(const char *params_json,
                                    const char *preset,
                                    struct EpimineSequence **out);

/**
 * Number of events, or 0 for a null handle.
 *
 * # Safety
 * `seq` must be null or a live handle.
 */
size_t epimine_sequence_len(const struct EpimineSequence *seq);

/**
 * # Safety
 * `seq` must be null or a handle not yet freed.
 */
void epimine_sequence_free(struct EpimineSequence *seq);

/**
 * Parallel episodes whose occurrences span at most `expiry` seconds.
 *
 * # Safety
 * `seq` must be a live handle; `out` must be writable.
 */
enum EpimineStatus epimine_mine_parallel(const struct EpimineSequence *seq,
                                         double expiry,
                                         double threshold,
                                         size_t max_size,
                                         struct EpimineResult **out);

/**
 * Serial episodes over the candidate intervals `(lows[i], highs[i]]`.
 *
 * # Safety
 * `seq` must be a live handle; `lows` and `highs` must point to
 * `n_intervals` values each; `out` must be writable.
 */
enum EpimineStatus epimine_mine_serial(const struct EpimineSequence *seq,
                                       const double *lows,
                                       const double *highs,
                                       size_t n_intervals,
                                       double threshold,
                                       size_t max_size,
                                       struct EpimineResult **out);

/**
 * Number of frequent episodes of `size`, or 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t epimine_result_count(const struct EpimineResult *result, size_t size);

/**
 * Largest episode size found, 0 if none.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t epimine_result_max_size(const struct EpimineResult *result);

/**
 * The result as JSON. The string belongs to the handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
const char *epimine_result_json(const struct EpimineResult *result);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void epimine_result_free(struct EpimineResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPIMINE_H */
