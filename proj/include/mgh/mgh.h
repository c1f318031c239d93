/* C interface to the mgh embedding toolkit.
 *
 * Every fallible call returns an mgh_status; on failure a description is
 * available from mgh_last_error() on the same thread until the next call.
 * Strings returned through char** are owned by the caller and released with
 * mgh_string_free(). Handles are not thread-safe; distinct handles may be
 * used from distinct threads.
 */
#ifndef MGH_MGH_H
#define MGH_MGH_H

#include <stddef.h>
#include <stdint.h>

#if defined(MGH_BUILDING_LIBRARY)
#define MGH_API __attribute__((visibility("default")))
#else
#define MGH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as process exit codes. */
typedef enum mgh_status {
  MGH_OK = 0,
  MGH_ERR_INTERNAL = 1,
  MGH_ERR_CONFIG = 2,
  MGH_ERR_FILE = 3,
  MGH_ERR_TRANSPORT = 4,
  MGH_ERR_VALIDATION = 5,
  MGH_ERR_FORMAT = 6,
  MGH_ERR_NUMERIC = 7,
  MGH_ERR_CONTRACT = 8
} mgh_status;

MGH_API const char* mgh_version(void);
MGH_API const char* mgh_last_error(void);
MGH_API void mgh_string_free(char* s);

/* ---- runs: a parsed configuration plus command-line overrides ---- */

typedef struct mgh_run mgh_run;

MGH_API mgh_status mgh_run_open(const char* config_path, mgh_run** out);
MGH_API mgh_status mgh_run_from_json(const char* config_json, mgh_run** out);
/* "section.key=value"; the value is read as JSON when it parses. */
MGH_API mgh_status mgh_run_set(mgh_run* run, const char* assignment);
MGH_API mgh_status mgh_run_resolved_json(const mgh_run* run, char** out_json);
MGH_API void mgh_run_free(mgh_run* run);

/* Each command writes its artifacts under the run's output_dir. The JSON
 * summary is optional (pass NULL to skip it). */
MGH_API mgh_status mgh_cmd_synth(const mgh_run* run, char** out_summary);
MGH_API mgh_status mgh_cmd_augment(const mgh_run* run, char** out_summary);
MGH_API mgh_status mgh_cmd_train(const mgh_run* run, char** out_summary);
MGH_API mgh_status mgh_cmd_eval(const mgh_run* run, char** out_summary);

/* ---- models ---- */

typedef struct mgh_model mgh_model;

MGH_API mgh_status mgh_model_load(const char* checkpoint_path, mgh_model** out);
/* encoder_json: {"num_layers", "num_heads", "model_dim", ...}; NULL or "{}"
 * gives the defaults. */
MGH_API mgh_status mgh_model_init(const char* encoder_json, mgh_model** out);
MGH_API mgh_status mgh_model_save(const mgh_model* model, const char* checkpoint_path);
MGH_API void mgh_model_free(mgh_model* model);
MGH_API size_t mgh_model_dim(const mgh_model* model);

/* pooling: "mean", "last" or "ata". out must hold mgh_model_dim() values. */
MGH_API mgh_status mgh_model_embed(const mgh_model* model, const char* text, const char* pooling,
                                   double* out, size_t out_len);

/* Tab-separated per-token anchor weights (position, token, raw,
 * normalized); with_attention appends the head-summed attention map.
 * direction: "incoming" or "literal". */
MGH_API mgh_status mgh_inspect(const mgh_model* model, const char* text, const char* direction,
                               int with_attention, char** out_tsv);

/* ---- pure helpers ---- */

/* attention: heads*k*k row-major, rows summing to one. raw and normalized
 * receive k values each. */
MGH_API mgh_status mgh_ata_weights(const double* attention, size_t heads, size_t k,
                                   const char* direction, double* raw, double* normalized);

/* levels_out receives total_steps entries in [1, num_levels]. strategy:
 * "curriculum", "reverse", "random" or "fixed". */
MGH_API mgh_status mgh_schedule_levels(const char* strategy, size_t total_steps, int num_levels,
                                       uint64_t seed, int fixed_level, int* levels_out);

#ifdef __cplusplus
}
#endif

#endif /* MGH_MGH_H */
