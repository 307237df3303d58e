/*
 * C interface to the topictrace library.
 *
 * All functions return a tt_status; on failure, tt_last_error() describes the
 * problem until the next call on the same thread. Handles are opaque and must
 * be released with their matching *_destroy function. Strings returned
 * through char** must be released with tt_string_free.
 */
#ifndef TOPICTRACE_H
#define TOPICTRACE_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(TOPICTRACE_BUILD)
#    define TT_API __declspec(dllexport)
#  else
#    define TT_API __declspec(dllimport)
#  endif
#else
#  define TT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tt_status {
    TT_OK = 0,
    TT_ERR_VALIDATION = 1, /* bad input, configuration or precondition */
    TT_ERR_IO = 2,         /* unreadable or unwritable file */
    TT_ERR_INTERNAL = 3
} tt_status;

typedef enum tt_measure {
    TT_MEASURE_HELLINGER = 0,
    TT_MEASURE_BHATTACHARYYA = 1,
    TT_MEASURE_QUASI_JACCARD = 2
} tt_measure;

typedef enum tt_direction { TT_FORWARD = 0, TT_BACKWARD = 1 } tt_direction;

typedef enum tt_cdf_scope { TT_CDF_GLOBAL = 0, TT_CDF_PER_PAIR = 1 } tt_cdf_scope;

typedef enum tt_event_kind {
    TT_EVENT_BIRTH = 0,
    TT_EVENT_DEATH = 1,
    TT_EVENT_EVOLUTION = 2,
    TT_EVENT_SPLIT = 3,
    TT_EVENT_MERGE = 4
} tt_event_kind;

typedef struct tt_config tt_config;
typedef struct tt_models tt_models;
typedef struct tt_graph tt_graph;

TT_API const char* tt_version(void);
TT_API const char* tt_last_error(void);
TT_API void tt_string_free(char* s);

/* Run configuration. Keys are the JSON config keys (e.g. "zeta", "out_dir"). */
TT_API tt_status tt_config_create(tt_config** out);
TT_API void tt_config_destroy(tt_config* cfg);
TT_API tt_status tt_config_load(tt_config* cfg, const char* json_path);
TT_API tt_status tt_config_set(tt_config* cfg, const char* key, const char* value);
TT_API tt_status tt_config_to_json(const tt_config* cfg, char** json_out);

/* Pipeline stages; each reads/writes the files described in the README. */
TT_API tt_status tt_ingest(const tt_config* cfg);
TT_API tt_status tt_fit(const tt_config* cfg);
TT_API tt_status tt_graph_stage(const tt_config* cfg);
TT_API tt_status tt_trace(const tt_config* cfg, const char* const* terms, size_t n_terms,
                          tt_direction direction);
TT_API tt_status tt_run_all(const tt_config* cfg);
TT_API tt_status tt_synth(const char* scenario_path, const char* out_dir);
TT_API tt_status tt_score(const char* run_dir, const char* truth_path, int epoch_tolerance,
                          const char* out_path);

/* Similarity between two probability vectors of length n (raw measure value). */
TT_API tt_status tt_similarity(tt_measure measure, const double* p, const double* q, size_t n,
                               double* out);

/* Fitted epoch models read from a models/ directory. */
TT_API tt_status tt_models_load(const char* models_dir, tt_models** out);
TT_API void tt_models_destroy(tt_models* models);
TT_API size_t tt_models_epoch_count(const tt_models* models);
TT_API tt_status tt_models_topic_count(const tt_models* models, size_t position, size_t* out);
TT_API tt_status tt_models_epoch_index(const tt_models* models, size_t position, int* out);

/* Pruned temporal graph built from loaded models. */
TT_API tt_status tt_graph_build(const tt_models* models, tt_measure measure, double zeta,
                                tt_cdf_scope scope, tt_graph** out);
TT_API void tt_graph_destroy(tt_graph* graph);
TT_API size_t tt_graph_node_count(const tt_graph* graph);
TT_API size_t tt_graph_edge_count(const tt_graph* graph);
TT_API size_t tt_graph_candidate_edge_count(const tt_graph* graph);
TT_API tt_status tt_graph_event_count(const tt_graph* graph, tt_event_kind kind, size_t* out);
TT_API tt_status tt_graph_mean_lifespan(const tt_graph* graph, int sole_parent_rule, double* out);
TT_API tt_status tt_graph_to_json(const tt_graph* graph, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* TOPICTRACE_H */
