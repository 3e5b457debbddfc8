/* C API for the many-shot ICL experiment harness.
 *
 * Every function returns an icl_status; on failure icl_last_error() holds a
 * human-readable message for the calling thread. Opaque handles are created
 * and released through their matching _open/_free pairs.
 */
#ifndef ICLHARNESS_H
#define ICLHARNESS_H

#include <stddef.h>

#if defined(_WIN32)
#define ICL_API __declspec(dllexport)
#else
#define ICL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum icl_status {
  ICL_OK = 0,
  ICL_ERR_INVALID_ARGUMENT = 1,
  ICL_ERR_IO = 2,
  ICL_ERR_MALFORMED_RECORD = 3,
  ICL_ERR_DUPLICATE_ID = 4,
  ICL_ERR_EMPTY_DATASET = 5,
  ICL_ERR_MISSING_PLACEHOLDER_VALUE = 6,
  ICL_ERR_BACKEND_UNREACHABLE = 7,
  ICL_ERR_RATE_LIMITED = 8,
  ICL_ERR_RESPONSE_MALFORMED = 9,
  ICL_ERR_EMPTY_INPUT = 10,
  ICL_ERR_NO_VALID_RATINGS = 11,
  ICL_ERR_DIMENSION_MISMATCH = 12,
  ICL_ERR_MISSING_SCORE = 13,
  ICL_ERR_GENERATION_FAILED = 14,
  ICL_ERR_SCORE_MISSING = 15,
  ICL_ERR_EMPTY_REFERENCE = 16,
  ICL_ERR_LENGTH_MISMATCH = 17,
  ICL_ERR_DEGENERATE_HULL = 18,
  ICL_ERR_TOO_FEW_EXAMPLES = 19,
  ICL_ERR_TOO_FEW_SAMPLES = 20,
  ICL_ERR_MISSING_BASELINE = 21,
  ICL_ERR_EMPTY_RECORDS = 22,
  ICL_ERR_INVALID_CONFIG = 23,
  ICL_ERR_INTERNAL = 100
} icl_status;

ICL_API const char* icl_version(void);

/* Message from the calling thread's most recent failing call. */
ICL_API const char* icl_last_error(void);

/* --- Metrics ------------------------------------------------------------ */

ICL_API icl_status icl_metric_chrf(const char* hypothesis, const char* reference,
                                   double* out_value);
ICL_API icl_status icl_metric_rouge_l(const char* hypothesis, const char* reference,
                                      double* out_value);
ICL_API icl_status icl_metric_exact_match(const char* const* predictions,
                                          const char* const* references,
                                          size_t count, double* out_value);

/* --- Statistics ----------------------------------------------------------- */

typedef struct icl_ttest_result {
  double t_statistic;
  double degrees_of_freedom;
  double p_value;
  int significant;
  double alpha;
} icl_ttest_result;

/* two_sided = 0 tests mean(a) > mean(b); two_sided = 1 tests inequality. */
ICL_API icl_status icl_welch_t_test(const double* a, size_t a_len, const double* b,
                                    size_t b_len, double alpha, int two_sided,
                                    icl_ttest_result* out);

/* --- Example pools --------------------------------------------------------- */

typedef struct icl_pool icl_pool;

/* task_json: {"kind": "Translation|Summarization|Reasoning|Classification",
 *             "template_id": "...", "metric": "ChrF|RougeL|ExactMatch",
 *             "source_language"?: "...", "target_language"?: "..."} */
ICL_API icl_status icl_pool_open(const char* dataset_path, const char* task_json,
                                 icl_pool** out_pool);
ICL_API size_t icl_pool_size(const icl_pool* pool);
ICL_API void icl_pool_free(icl_pool* pool);

/* --- Commands ---------------------------------------------------------------
 *
 * Config-file driven entry points backing the CLI subcommands. overrides_json
 * (may be NULL) is applied to the loaded config as an RFC 7386 merge patch;
 * output override arguments (may be NULL) replace the config's output paths.
 */

ICL_API icl_status icl_cmd_run(const char* config_path, const char* overrides_json,
                               const char* output_dir);
ICL_API icl_status icl_cmd_augment(const char* config_path,
                                   const char* overrides_json,
                                   const char* output_dir);
ICL_API icl_status icl_cmd_score_difficulty(const char* config_path,
                                            const char* overrides_json,
                                            const char* output_path);
ICL_API icl_status icl_cmd_analyze(const char* config_path,
                                   const char* overrides_json, const char* kind,
                                   const char* const* results_paths,
                                   size_t results_count,
                                   const char* baseline_method);
ICL_API icl_status icl_cmd_report(const char* config_path,
                                  const char* overrides_json,
                                  const char* const* results_paths,
                                  size_t results_count);

/* Writes the built-in prompt template files into a directory. */
ICL_API icl_status icl_templates_export(const char* dir);

#ifdef __cplusplus
}
#endif

#endif /* ICLHARNESS_H */
