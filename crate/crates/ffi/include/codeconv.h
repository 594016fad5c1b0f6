/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef CODECONV_H
#define CODECONV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CcStatus {
  CC_STATUS_OK = 0,
  CC_STATUS_INVALID_ARGUMENT = 1,
  CC_STATUS_INSUFFICIENT_RESULTS = 2,
  CC_STATUS_DECODE_FAILURE = 3,
  CC_STATUS_NOT_READY = 4,
  CC_STATUS_CONFIG = 5,
  CC_STATUS_IO = 6,
  CC_STATUS_NULL_POINTER = 7,
  CC_STATUS_BUFFER_TOO_SMALL = 8,
  CC_STATUS_PANIC = 9,
} CcStatus;

typedef enum CcStragglerMode {
  /**
   * `param` is the slowdown factor.
   */
  CC_STRAGGLER_MODE_DELAYED = 0,
  /**
   * `param` is the failure time in seconds.
   */
  CC_STRAGGLER_MODE_FAIL = 1,
  /**
   * `param` is the departure time in seconds.
   */
  CC_STRAGGLER_MODE_LEAVE = 2,
} CcStragglerMode;

typedef enum CcStrategy {
  CC_STRATEGY_UNCODED = 0,
  CC_STRATEGY_CODED = 1,
  CC_STRATEGY_DYNAMIC = 2,
} CcStrategy;

/**
 * Opaque Vandermonde encoding matrix.
 */
typedef struct CcEncodingMatrix CcEncodingMatrix;

/**
 * Opaque scenario configuration.
 */
typedef struct CcScenario CcScenario;

/**
 * Summary of one simulated episode.
 */
typedef struct CcEpisodeSummary {
  bool success;
  double completion_time;
  double horizon;
  size_t pieces_dispatched;
  size_t redundancy_used;
} CcEpisodeSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *cc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cc_version(void);

/**
 * Full linear convolution of `a` (length `n1`) and `x` (length `n2`) into
 * `out`, which must hold at least `n1 + n2 - 1` values.
 *
 * # Safety
 * `a`, `x` and `out` must point to buffers of the stated lengths.
 */
enum CcStatus cc_convolve(const double *a,
                          size_t n1,
                          const double *x,
                          size_t n2,
                          double *out,
                          size_t out_len);

/**
 * Creates a `rows x cols` Vandermonde encoding matrix.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum CcStatus cc_encoding_matrix_new(size_t rows, size_t cols, struct CcEncodingMatrix **out);

/**
 * Releases a matrix; null is ignored.
 *
 * # Safety
 * `m` must come from [`cc_encoding_matrix_new`] and not be used afterwards.
 */
void cc_encoding_matrix_free(struct CcEncodingMatrix *m);

/**
 * Entry `(row, col)` of the matrix.
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
enum CcStatus cc_encoding_matrix_entry(const struct CcEncodingMatrix *m,
                                       size_t row,
                                       size_t col,
                                       double *out);

/**
 * Encodes `cols` pieces of length `piece_len`, stored back to back in
 * `pieces`, with generator row `row` into `out` (`piece_len` values).
 *
 * # Safety
 * Buffers must hold the stated number of values.
 */
enum CcStatus cc_encode(const struct CcEncodingMatrix *m,
                        const double *pieces,
                        size_t piece_len,
                        size_t row,
                        double *out,
                        size_t out_len);

/**
 * Recovers the `cols` source pieces from `cols` coded results. `rows[i]` is
 * the generator row of the `i`-th result; results of length `result_len` are
 * stored back to back. The decoded pieces are written back to back to `out`.
 *
 * # Safety
 * Buffers must hold the stated number of values.
 */
enum CcStatus cc_decode(const struct CcEncodingMatrix *m,
                        const size_t *rows,
                        size_t count,
                        const double *results,
                        size_t result_len,
                        double *out,
                        size_t out_len);

/**
 * Reference scenario `index` (1 to 4) with vector lengths divided by `scale`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum CcStatus cc_scenario_preset(size_t index, size_t scale, struct CcScenario **out);

/**
 * Sets the straggler fraction and behaviour.
 *
 * # Safety
 * `sc` must be a live handle.
 */
enum CcStatus cc_scenario_set_stragglers(struct CcScenario *sc,
                                         double ratio,
                                         enum CcStragglerMode mode,
                                         double param);

/**
 * Sets the dynamic strategy's piece length; 0 restores the default.
 *
 * # Safety
 * `sc` must be a live handle.
 */
enum CcStatus cc_scenario_set_b(struct CcScenario *sc, size_t b);

/**
 * Releases a scenario; null is ignored.
 *
 * # Safety
 * `sc` must come from [`cc_scenario_preset`] and not be used afterwards.
 */
void cc_scenario_free(struct CcScenario *sc);

/**
 * Simulates one episode of `strategy` with `seed`.
 *
 * # Safety
 * `sc` must be a live handle and `out` a valid pointer.
 */
enum CcStatus cc_run_episode(const struct CcScenario *sc,
                             enum CcStrategy strategy,
                             uint64_t seed,
                             struct CcEpisodeSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CODECONV_H */
