#ifndef HYBRIDCACHE_H
#define HYBRIDCACHE_H

/* Generated by cbindgen from hybridcache-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum HcStatus {
  HcOk = 0,
  /**
   * A required pointer argument was null.
   */
  HcNullArgument = 1,
  /**
   * Malformed input (bad JSON, bad mode string, non-UTF-8).
   */
  HcParse = 2,
  /**
   * Inputs parsed but violate a model constraint.
   */
  HcValidation = 3,
  /**
   * Instance exceeds an exact-search bound.
   */
  HcTooLarge = 4,
  /**
   * Internal failure (a bug; details in `hc_last_error`).
   */
  HcInternal = 5,
} HcStatus;

/**
 * Opaque placement handle.
 */
typedef struct HcPlacement HcPlacement;

/**
 * Opaque popularity-profile handle.
 */
typedef struct HcPopularity HcPopularity;

/**
 * Opaque system configuration handle.
 */
typedef struct HcSystem HcSystem;

/**
 * Expected shared-link loads in units of content size.
 */
typedef struct HcLoadReport {
  double r1;
  double r2;
  double r;
} HcLoadReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *hc_last_error(void);

/**
 * Library version as a static string.
 */
const char *hc_version(void);

/**
 * Build a system configuration: `K` SBSs, `N` contents, per-SBS cache
 * capacity `M`, per-SBS user counts `z[0..z_len]`, content size `f` bits.
 *
 * # Safety
 * `z` must point to `z_len` readable entries; `out` must be a valid pointer.
 */
enum HcStatus hc_system_new(size_t k,
                            size_t n,
                            size_t m,
                            const size_t *z,
                            size_t z_len,
                            double f,
                            struct HcSystem **out);

/**
 * # Safety
 * `system` must come from `hc_system_new` and not be freed twice.
 */
void hc_system_free(struct HcSystem *system);

/**
 * Homogeneous Zipf(`alpha`) popularity over `n` contents for `k` SBSs.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum HcStatus hc_popularity_zipf(size_t n, double alpha, size_t k, struct HcPopularity **out);

/**
 * Popularity from a row-major `n x k` matrix: `rows[content * k + sbs]`.
 *
 * # Safety
 * `rows` must point to `n * k` readable doubles; `out` must be valid.
 */
enum HcStatus hc_popularity_matrix(const double *rows,
                                   size_t n,
                                   size_t k,
                                   struct HcPopularity **out);

/**
 * # Safety
 * `pop` must come from a `hc_popularity_*` constructor, freed once.
 */
void hc_popularity_free(struct HcPopularity *pop);

/**
 * Three-group partition placement: `m1` contents fully cached, ranks
 * `m1..n1` coded, the rest uncached.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum HcStatus hc_placement_hybrid(size_t m1, size_t n1, struct HcPlacement **out);

/**
 * # Safety
 * `placement` must come from a `hc_placement_*` constructor, freed once.
 */
void hc_placement_free(struct HcPlacement *placement);

/**
 * Closed-form expected load of a placement.
 *
 * # Safety
 * All handles must be live; `out` must be a valid pointer.
 */
enum HcStatus hc_analyze(const struct HcSystem *system,
                         const struct HcPopularity *pop,
                         const struct HcPlacement *placement,
                         struct HcLoadReport *out);

/**
 * Monte Carlo mean load (and standard errors) over `slots` delivery slots.
 *
 * # Safety
 * All handles must be live; `out_mean` and `out_stderr` must be valid.
 */
enum HcStatus hc_simulate(const struct HcSystem *system,
                          const struct HcPopularity *pop,
                          const struct HcPlacement *placement,
                          size_t slots,
                          uint64_t seed,
                          struct HcLoadReport *out_mean,
                          struct HcLoadReport *out_stderr);

/**
 * Best three-group partition `(M1, N1)` for a homogeneous profile.
 *
 * # Safety
 * Handles must be live; out pointers must be valid.
 */
enum HcStatus hc_optimize_hybrid(const struct HcSystem *system,
                                 const struct HcPopularity *pop,
                                 size_t *out_m1,
                                 size_t *out_n1,
                                 struct HcLoadReport *out);

/**
 * Best two-group pure-coded partition (`M1` pinned to 0).
 *
 * # Safety
 * Handles must be live; out pointers must be valid.
 */
enum HcStatus hc_optimize_pure_coded(const struct HcSystem *system,
                                     const struct HcPopularity *pop,
                                     size_t *out_m1,
                                     size_t *out_n1,
                                     struct HcLoadReport *out);

/**
 * Pure uncoded baseline for a homogeneous profile (caches the `M` most
 * popular contents everywhere).
 *
 * # Safety
 * Handles must be live; out pointers must be valid.
 */
enum HcStatus hc_optimize_pure_uncoded(const struct HcSystem *system,
                                       const struct HcPopularity *pop,
                                       size_t *out_m1,
                                       size_t *out_n1,
                                       struct HcLoadReport *out);

/**
 * Run a JSON scenario (same schema as the CLI) and return the results CSV
 * through `out_csv`. Free the string with [`hc_string_free`].
 *
 * # Safety
 * `mode` and `scenario_json` must be NUL-terminated strings; `out_csv` must
 * be a valid pointer.
 */
enum HcStatus hc_run_scenario(const char *mode, const char *scenario_json, char **out_csv);

/**
 * Free a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void hc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYBRIDCACHE_H */
