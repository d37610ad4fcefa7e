#ifndef TRM_H
#define TRM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every entry point.
 */
typedef enum TrmStatus {
  TRM_STATUS_OK = 0,
  TRM_STATUS_NULL_POINTER = 1,
  TRM_STATUS_DOMAIN = 2,
  TRM_STATUS_INDEX_OUT_OF_RANGE = 3,
  TRM_STATUS_DIMENSION_MISMATCH = 4,
  TRM_STATUS_BOUNDARY = 5,
  TRM_STATUS_IMPOSSIBLE_OUTCOME = 6,
  TRM_STATUS_DEGENERATE_DENSITY = 7,
  TRM_STATUS_RESAMPLE_LIMIT = 8,
  TRM_STATUS_SCHEMA = 9,
  TRM_STATUS_BUFFER_TOO_SMALL = 10,
  TRM_STATUS_IO = 11,
  TRM_STATUS_CHECK_FAILED = 12,
  TRM_STATUS_PANIC = 99,
} TrmStatus;

/**
 * A grouping of outcomes into blocks.
 */
typedef struct TrmPartition TrmPartition;

/**
 * A seeded random stream.
 */
typedef struct TrmRng TrmRng;

/**
 * A point of the probability simplex.
 */
typedef struct TrmState TrmState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *trm_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `cap`). Returns the full message length plus one, or 0 when
 * there is no error.
 *
 * # Safety
 * `buf` must be NULL or point to `cap` writable bytes.
 */
size_t trm_last_error_message(char *buf, size_t cap);

/**
 * Creates a state from `n` nonnegative weights summing to 1.
 *
 * # Safety
 * `x` must point to `n` doubles; `out` must be writable.
 */
enum TrmStatus trm_state_new(const double *x, size_t n, struct TrmState **out);

/**
 * # Safety
 * `state` must be NULL or a handle from this library, freed once.
 */
void trm_state_free(struct TrmState *state);

/**
 * Number of components; 0 for NULL.
 *
 * # Safety
 * `state` must be NULL or a live handle.
 */
size_t trm_state_dim(const struct TrmState *state);

/**
 * # Safety
 * `state` must be a live handle and `out` must hold `cap` doubles.
 */
enum TrmStatus trm_state_components(const struct TrmState *state, double *out, size_t cap);

/**
 * Creates a partition from per-outcome block labels: outcome `i` goes to
 * block `labels[i]`. Labels must be `0..k` with every block used.
 *
 * # Safety
 * `labels` must point to `n` values; `out` must be writable.
 */
enum TrmStatus trm_partition_new(const size_t *labels, size_t n, struct TrmPartition **out);

/**
 * The partition into `n` single outcomes.
 *
 * # Safety
 * `out` must be writable.
 */
enum TrmStatus trm_partition_singletons(size_t n, struct TrmPartition **out);

/**
 * # Safety
 * `p` must be NULL or a handle from this library, freed once.
 */
void trm_partition_free(struct TrmPartition *p);

/**
 * Number of blocks; 0 for NULL.
 *
 * # Safety
 * `p` must be NULL or a live handle.
 */
size_t trm_partition_len(const struct TrmPartition *p);

/**
 * A ChaCha8 stream; equal `(seed, stream)` pairs give equal draws.
 *
 * # Safety
 * `out` must be writable.
 */
enum TrmStatus trm_rng_new(uint64_t seed, uint64_t stream, struct TrmRng **out);

/**
 * # Safety
 * `rng` must be NULL or a handle from this library, freed once.
 */
void trm_rng_free(struct TrmRng *rng);

/**
 * # Safety
 * `out` must be writable.
 */
enum TrmStatus trm_simplex_measure(size_t n, double *out);

/**
 * # Safety
 * `state` must be live; `out` writable.
 */
enum TrmStatus trm_region_measure(const struct TrmState *state, size_t i, double *out);

/**
 * Index of the region containing the break point `lambda`.
 *
 * # Safety
 * `state` must be live; `lambda` must point to `n` doubles; `out` writable.
 */
enum TrmStatus trm_region_of(const struct TrmState *state,
                             const double *lambda,
                             size_t n,
                             size_t *out);

/**
 * Block probabilities (one per block of `p`).
 *
 * # Safety
 * Handles must be live; `out` must hold `cap` doubles.
 */
enum TrmStatus trm_outcome_probabilities(const struct TrmState *state,
                                         const struct TrmPartition *p,
                                         double *out,
                                         size_t cap);

/**
 * Post-measurement state for block `block`.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum TrmStatus trm_collapse(const struct TrmState *state,
                            const struct TrmPartition *p,
                            size_t block,
                            struct TrmState **out);

/**
 * One simulated measurement. `post` may be NULL if the collapsed state is
 * not needed.
 *
 * # Safety
 * Handles must be live; `block` writable; `post` NULL or writable.
 */
enum TrmStatus trm_run_once(const struct TrmState *state,
                            const struct TrmPartition *p,
                            struct TrmRng *rng,
                            size_t *block,
                            struct TrmState **post);

/**
 * Block counts over `trials` measurements; identical for equal seeds.
 *
 * # Safety
 * Handles must be live; `counts` must hold `cap` values.
 */
enum TrmStatus trm_run_many(const struct TrmState *state,
                            const struct TrmPartition *p,
                            uint64_t trials,
                            uint64_t seed,
                            uint64_t *counts,
                            size_t cap);

/**
 * Closed-form law of the complementary model (N = 2 or 3).
 *
 * # Safety
 * `lambda` must point to `n` doubles; `out` must hold `cap` doubles.
 */
enum TrmStatus trm_complementary_probabilities(const double *lambda,
                                               size_t n,
                                               double *out,
                                               size_t cap);

/**
 * Outcome probabilities `(p_plus, p_minus)` of the ε-model.
 *
 * # Safety
 * Outputs must be writable.
 */
enum TrmStatus trm_epsilon_probability(double cos_theta,
                                       double epsilon,
                                       double *p_plus,
                                       double *p_minus);

/**
 * Exact universal average on `n_c` cells (N = 2, or N = 3 with square `n_c <= 16`).
 *
 * # Safety
 * Handles must be live; `out` must hold `cap` doubles.
 */
enum TrmStatus trm_universal_probability_exact(const struct TrmState *state,
                                               size_t n_c,
                                               const struct TrmPartition *p,
                                               double *out,
                                               size_t cap);

/**
 * Classical bound check. `violated` receives 0 or 1; `margin` receives
 * `pVW - pUW - pUcV`.
 *
 * # Safety
 * Outputs must be writable.
 */
enum TrmStatus trm_kolmogorov_check(double p_vw,
                                    double p_uw,
                                    double p_ucv,
                                    double tol,
                                    int32_t *violated,
                                    double *margin);

/**
 * Qubit realizability of three transition probabilities. `deficit` is 0
 * when embeddable.
 *
 * # Safety
 * Outputs must be writable.
 */
enum TrmStatus trm_qubit_embeddable(double p_ab,
                                    double p_bc,
                                    double p_ac,
                                    double tol,
                                    int32_t *embeddable,
                                    double *deficit);

/**
 * Runs an experiment config given as JSON text and returns the JSON report
 * in `out` (free with `trm_string_free`). A failed oracle check still
 * returns the report, with status `TRM_STATUS_CHECK_FAILED`.
 *
 * # Safety
 * `config` must be a NUL-terminated string; `out` writable.
 */
enum TrmStatus trm_run_config_json(const char *config, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, freed once.
 */
void trm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRM_H */
