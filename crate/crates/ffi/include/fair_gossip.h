#ifndef FAIR_GOSSIP_H
#define FAIR_GOSSIP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Bit `i` of [`FgTrialSummary::good_flags`], in declaration order.
 */
#define FG_GOOD_VOTES (1 << 0)

#define FG_GOOD_K_DISTINCT (1 << 1)

#define FG_GOOD_FINDMIN (1 << 2)

#define FG_GOOD_COMMIT (1 << 3)

#define FG_GOOD_COHERENCE (1 << 4)

#define FG_GOOD_UNTAINTED (1 << 5)

typedef enum FgStatus {
  FG_STATUS_OK = 0,
  FG_STATUS_NULL_POINTER = 1,
  FG_STATUS_INVALID_ARGUMENT = 2,
  FG_STATUS_INVALID_CONFIG = 3,
  FG_STATUS_UNKNOWN_STRATEGY = 4,
  FG_STATUS_IO = 5,
  FG_STATUS_BUFFER_TOO_SMALL = 6,
  FG_STATUS_PANIC = 7,
} FgStatus;

/**
 * Simulation setup. Build with `fg_config_new`, release with `fg_config_free`.
 */
typedef struct FgConfig FgConfig;

/**
 * A completed trial. Release with `fg_trace_free`.
 */
typedef struct FgTrace FgTrace;

typedef struct FgTrialSummary {
  /**
   * Winning color, 0 when the run failed.
   */
  uint32_t outcome_color;
  /**
   * Owner of the final certificate, 0 when there is none.
   */
  uint32_t winner;
  uint32_t rounds_elapsed;
  uint32_t good_flags;
  uint64_t total_messages;
  uint64_t max_message_bits;
} FgTrialSummary;

typedef struct FgFairnessSummary {
  uint64_t trials;
  uint64_t successes;
  uint64_t fail_count;
  /**
   * Largest `|frequency - share|` over the colors.
   */
  double max_abs_deviation;
  /**
   * 1 pass, 0 fail, -1 indeterminate.
   */
  int32_t verdict;
} FgFairnessSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a config for `n` agents split evenly between colors 1 and 2.
 * Writes the handle to `*out`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum FgStatus fg_config_new(uint32_t n, double gamma, double chi, struct FgConfig **out);

/**
 * # Safety
 * `config` must come from `fg_config_new` and not be used afterwards. Null is ignored.
 */
void fg_config_free(struct FgConfig *config);

/**
 * Sets the color of agent `i + 1` to `colors[i]`; `len` must equal `n`.
 * The color alphabet grows to the largest color given.
 *
 * # Safety
 * `config` must be a live handle; `colors` must point to `len` values.
 */
enum FgStatus fg_config_set_colors(struct FgConfig *config, const uint32_t *colors, size_t len);

/**
 * Replaces the faulty set and fault bound `alpha`.
 *
 * # Safety
 * `config` must be a live handle; `ids` must point to `len` values.
 */
enum FgStatus fg_config_set_faulty(struct FgConfig *config,
                                   const uint32_t *ids,
                                   size_t len,
                                   double alpha);

/**
 * Sets the coalition to `ids` running the built-in strategy `strategy`
 * (a NUL-terminated name). `len == 0` removes the coalition.
 *
 * # Safety
 * `config` must be a live handle; `ids` must point to `len` values;
 * `strategy` must be a NUL-terminated string when `len > 0`.
 */
enum FgStatus fg_config_set_coalition(struct FgConfig *config,
                                      const uint32_t *ids,
                                      size_t len,
                                      const char *strategy);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum FgStatus fg_config_set_seed(struct FgConfig *config, uint64_t seed);

/**
 * Validates `config`, runs one trial and writes a new trace handle to `*out`.
 *
 * # Safety
 * `config` must be a live handle; `out` must be valid for a pointer write.
 */
enum FgStatus fg_run_trial(const struct FgConfig *config, struct FgTrace **out);

/**
 * # Safety
 * `trace` must come from `fg_run_trial` and not be used afterwards. Null is ignored.
 */
void fg_trace_free(struct FgTrace *trace);

/**
 * # Safety
 * `trace` must be a live handle; `out` must be valid for a write.
 */
enum FgStatus fg_trace_summary(const struct FgTrace *trace, struct FgTrialSummary *out);

/**
 * Writes the trace as JSON lines to the file at `path`.
 *
 * # Safety
 * `trace` must be a live handle; `path` must be a NUL-terminated string.
 */
enum FgStatus fg_trace_write_jsonl(const struct FgTrace *trace, const char *path);

/**
 * Runs `trials` trials at seeds `seed0..` and tests color frequencies
 * against active shares at `sigma_mult` standard errors. The failure-rate
 * bound is `max_fail_rate`.
 *
 * # Safety
 * `config` must be a live handle; `out` must be valid for a write.
 */
enum FgStatus fg_fairness_experiment(const struct FgConfig *config,
                                     uint64_t trials,
                                     uint64_t seed0,
                                     double sigma_mult,
                                     double max_fail_rate,
                                     struct FgFairnessSummary *out);

/**
 * Length in bytes of the last error message on this thread, without the NUL; 0 if none.
 */
size_t fg_last_error_length(void);

/**
 * Copies the last error message on this thread into `buf` as a
 * NUL-terminated string. Returns `FG_STATUS_BUFFER_TOO_SMALL` when `len`
 * cannot hold the message and its NUL; an empty string is written when
 * there is no error.
 *
 * # Safety
 * `buf` must be valid for `len` bytes of writes.
 */
enum FgStatus fg_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FAIR_GOSSIP_H */
