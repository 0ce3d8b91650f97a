/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#ifndef DOCDRIFT_H
#define DOCDRIFT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call. The error values match the CLI exit codes.
 */
typedef enum DdStatus {
  DD_STATUS_OK = 0,
  /**
   * I/O, file format or report failure
   */
  DD_STATUS_FAILED = 1,
  DD_STATUS_CONFIG = 2,
  DD_STATUS_CORPUS = 3,
  DD_STATUS_TRANSPORT = 4,
  DD_STATUS_FIXTURE_MISS = 5,
  DD_STATUS_LABEL = 6,
  DD_STATUS_NULL_ARGUMENT = 10,
  DD_STATUS_INVALID_UTF8 = 11,
  DD_STATUS_INVALID_JSON = 12,
  DD_STATUS_PANIC = 13,
} DdStatus;

/**
 * A chat client (replay, record or live).
 */
typedef struct DdClient DdClient;

/**
 * Metrics computed from one results set.
 */
typedef struct DdMetrics DdMetrics;

/**
 * Function-level metrics. Rates are NaN when their denominator is zero.
 */
typedef struct DdFunctionMetrics {
  size_t tp;
  size_t fp;
  size_t tn;
  size_t fn_;
  double flag_rate;
  double precision;
  double recall;
  double accuracy;
  double f1;
} DdFunctionMetrics;

/**
 * Inconsistency-level metrics. Rates are NaN when nothing was labeled.
 */
typedef struct DdInconsistencyMetrics {
  size_t findings;
  size_t tp;
  size_t fp;
  double precision;
  size_t under_promise;
  double under_promise_rate;
} DdInconsistencyMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *dd_version(void);

/**
 * Message for the last failed call on this thread, or NULL after a
 * successful one. Valid until the next `dd_` call on the same thread.
 */
const char *dd_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, freed once.
 */
void dd_string_free(char *s);

/**
 * Scans `root` and writes the surviving pairs as a JSON array.
 * `min_tokens` and `dedupe` follow the CLI filters; no sampling.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out_pairs_json` must be
 * writable.
 */
enum DdStatus dd_extract(const char *root,
                         const char *language,
                         const char *project,
                         size_t min_tokens,
                         bool dedupe,
                         char **out_pairs_json);

/**
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum DdStatus dd_system_prompt(const char *variant,
                               const char *project_name,
                               const char *project_kind,
                               char **out);

/**
 * # Safety
 * `pair_json` must be a NUL-terminated JSON object; `out` writable.
 */
enum DdStatus dd_user_prompt(const char *pair_json, char **out);

/**
 * Parses one raw model response into a detection result (JSON object).
 * Never fails on bad model output; that yields a malformed result.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out_result_json` writable.
 */
enum DdStatus dd_parse_output(const char *raw_text,
                              const char *variant,
                              const char *pair_id,
                              char **out_result_json);

/**
 * Replay-only client over a fixture directory.
 *
 * # Safety
 * `fixtures_dir` must be NUL-terminated; `out_client` writable.
 */
enum DdStatus dd_client_new_replay(const char *fixtures_dir, struct DdClient **out_client);

/**
 * Client configured like the CLI: `transport` is live, record or replay;
 * live and record read `DOCDRIFT_API_BASE` and `DOCDRIFT_API_KEY`.
 * `fixtures_dir` may be NULL for live.
 *
 * # Safety
 * String arguments must be NULL or NUL-terminated; `out_client` writable.
 */
enum DdStatus dd_client_new_from_env(const char *transport,
                                     const char *fixtures_dir,
                                     struct DdClient **out_client);

/**
 * # Safety
 * `client` must be NULL or a handle from this library, freed once.
 */
void dd_client_free(struct DdClient *client);

/**
 * Runs detection over a JSON array of pairs and writes a JSON array of
 * results in the same order.
 *
 * # Safety
 * `client` must be a live handle; strings NUL-terminated; `out` writable.
 */
enum DdStatus dd_detect(const struct DdClient *client,
                        const char *pairs_json,
                        const char *variant,
                        const char *project_name,
                        const char *project_kind,
                        const char *model,
                        size_t concurrency,
                        char **out_results_json);

/**
 * Renders the HTML report. `model` may be NULL.
 *
 * # Safety
 * Strings must be NULL (where allowed) or NUL-terminated; `out_html`
 * writable.
 */
enum DdStatus dd_render_report(const char *results_json,
                               const char *pairs_json,
                               const char *model,
                               char **out_html);

/**
 * The summary.json text for a results array.
 *
 * # Safety
 * `results_json` must be NUL-terminated; `out_json` writable.
 */
enum DdStatus dd_summary(const char *results_json, char **out_json);

/**
 * Scores results against labels. Either label array may be NULL, not
 * both. Label arrays hold the same records as the CLI label files.
 *
 * # Safety
 * Strings must be NULL (where allowed) or NUL-terminated; `out_metrics`
 * writable.
 */
enum DdStatus dd_metrics_compute(const char *results_json,
                                 const char *labels_json,
                                 const char *finding_labels_json,
                                 struct DdMetrics **out_metrics);

/**
 * Copies the function-level metrics. Fails with `DD_STATUS_LABEL` when
 * they were not computed (no ground-truth labels).
 *
 * # Safety
 * `metrics` must be a live handle; `out` writable.
 */
enum DdStatus dd_metrics_function(const struct DdMetrics *metrics, struct DdFunctionMetrics *out);

/**
 * Copies the inconsistency-level metrics. Fails with `DD_STATUS_LABEL`
 * when they were not computed (no finding labels).
 *
 * # Safety
 * `metrics` must be a live handle; `out` writable.
 */
enum DdStatus dd_metrics_inconsistency(const struct DdMetrics *metrics,
                                       struct DdInconsistencyMetrics *out);

/**
 * The metrics as the JSON `docdrift eval --json` prints.
 *
 * # Safety
 * `metrics` must be a live handle; `out_json` writable.
 */
enum DdStatus dd_metrics_to_json(const struct DdMetrics *metrics, char **out_json);

/**
 * # Safety
 * `metrics` must be NULL or a handle from this library, freed once.
 */
void dd_metrics_free(struct DdMetrics *metrics);

/**
 * Cohen's kappa for a 2x2 table: rows rater A, columns rater B, both
 * ordered (consistent, inconsistent).
 *
 * # Safety
 * `out_kappa` must be writable.
 */
enum DdStatus dd_kappa_from_table(size_t a, size_t b, size_t c, size_t d, double *out_kappa);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DOCDRIFT_H */
