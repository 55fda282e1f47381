#ifndef ONTOWEAK_ONTOWEAK_H
#define ONTOWEAK_ONTOWEAK_H

#include <stddef.h>

#if defined(_WIN32)
#define OW_API __declspec(dllexport)
#else
#define OW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes. */
typedef enum ow_status {
  OW_OK = 0,
  OW_ERR_INTERNAL = 1,
  OW_ERR_CONFIG = 2,
  OW_ERR_DATA = 3,
  OW_ERR_NUMERIC = 4
} ow_status;

typedef struct ow_config ow_config;
typedef struct ow_gradcheck_report ow_gradcheck_report;

/* Receives one log line at a time; `line` is valid only during the call. */
typedef void (*ow_log_fn)(const char* line, void* user);

/* Message for the last failing call on this thread, or "". */
OW_API const char* ow_last_error(void);

OW_API ow_status ow_config_create(ow_config** out);
OW_API void ow_config_destroy(ow_config* cfg);
/* Later assignments win. Keys are validated when a command runs. */
OW_API ow_status ow_config_set(ow_config* cfg, const char* key, const char* value);
/* Relative paths in the file resolve against the file's directory. */
OW_API ow_status ow_config_load_file(ow_config* cfg, const char* path);
/* Copies the resolved configuration into buf (NUL-terminated, truncated to
   cap). *needed receives the full length including the terminator. */
OW_API ow_status ow_config_resolved(const ow_config* cfg, char* buf, size_t cap, size_t* needed);

OW_API ow_status ow_synth_data(const ow_config* cfg, ow_log_fn log, void* user);
/* out_path may be NULL: <out_dir>/correlation.txt */
OW_API ow_status ow_build_corr(const ow_config* cfg, const char* out_path, ow_log_fn log,
                               void* user);
OW_API ow_status ow_train(const ow_config* cfg, ow_log_fn log, void* user);
OW_API ow_status ow_eval(const ow_config* cfg, ow_log_fn log, void* user);

/* Runs the finite-difference check for one model kind on the built-in toy
   ontology. A failed check still returns OW_OK; query ow_gradcheck_passed.
   entries_per_param = 0 checks every entry. */
OW_API ow_status ow_gradcheck(const char* kind, double tolerance, size_t entries_per_param,
                              ow_gradcheck_report** out);
OW_API void ow_gradcheck_destroy(ow_gradcheck_report* report);
OW_API int ow_gradcheck_passed(const ow_gradcheck_report* report);
OW_API double ow_gradcheck_max_error(const ow_gradcheck_report* report);
OW_API size_t ow_gradcheck_param_count(const ow_gradcheck_report* report);
OW_API const char* ow_gradcheck_param_name(const ow_gradcheck_report* report, size_t i);
OW_API double ow_gradcheck_param_error(const ow_gradcheck_report* report, size_t i);
OW_API size_t ow_gradcheck_param_entries(const ow_gradcheck_report* report, size_t i);

/* *defined is set to 0 when the metric is undefined for the input
   (no positives for AP, a single class for AUC). */
OW_API ow_status ow_average_precision(const double* scores, const int* labels, size_t n,
                                      double* out, int* defined);
OW_API ow_status ow_roc_auc(const double* scores, const int* labels, size_t n, double* out,
                            int* defined);

/* Ontology summary: counts of subclasses and superclasses in a file. */
OW_API ow_status ow_ontology_counts(const char* path, size_t* num_sub, size_t* num_super);

#ifdef __cplusplus
}
#endif

#endif
