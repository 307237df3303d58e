/* Exercises the C interface from C. */
#define _POSIX_C_SOURCE 200809L

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "topictrace/topictrace.h"

static int failures = 0;

#define EXPECT(cond)                                                       \
    do {                                                                   \
        if (!(cond)) {                                                     \
            fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                    \
        }                                                                  \
    } while (0)

static void write_text(const char* path, const char* text) {
    FILE* f = fopen(path, "w");
    if (!f) {
        perror(path);
        exit(2);
    }
    fputs(text, f);
    fclose(f);
}

static void check_similarity(void) {
    const double p[2] = {0.5, 0.5};
    const double q[2] = {1.0, 0.0};
    double v = -1.0;
    EXPECT(tt_similarity(TT_MEASURE_BHATTACHARYYA, p, q, 2, &v) == TT_OK);
    EXPECT(fabs(v - sqrt(0.5)) < 1e-12);
    EXPECT(tt_similarity(TT_MEASURE_HELLINGER, p, p, 2, &v) == TT_OK);
    EXPECT(fabs(v) < 1e-12);
    EXPECT(tt_similarity(TT_MEASURE_QUASI_JACCARD, p, q, 2, &v) == TT_OK);
    EXPECT(fabs(v - 0.5) < 1e-12);
    EXPECT(tt_similarity((tt_measure)9, p, q, 2, &v) == TT_ERR_VALIDATION);
    EXPECT(tt_similarity(TT_MEASURE_HELLINGER, NULL, q, 2, &v) == TT_ERR_VALIDATION);
    EXPECT(strlen(tt_last_error()) > 0);
}

static void check_config(void) {
    tt_config* cfg = NULL;
    char* json = NULL;
    EXPECT(tt_config_create(&cfg) == TT_OK);
    EXPECT(tt_config_set(cfg, "zeta", "0.9") == TT_OK);
    EXPECT(tt_config_set(cfg, "zeta", "abc") == TT_ERR_VALIDATION);
    EXPECT(tt_config_set(cfg, "nonsense", "1") == TT_ERR_VALIDATION);
    EXPECT(strstr(tt_last_error(), "nonsense") != NULL);
    EXPECT(tt_config_to_json(cfg, &json) == TT_OK);
    EXPECT(json != NULL && strstr(json, "\"zeta\": 0.9") != NULL);
    tt_string_free(json);
    EXPECT(tt_config_load(cfg, "/nonexistent/config.json") == TT_ERR_IO);
    /* ranges are checked when a stage runs, once all keys are known */
    EXPECT(tt_config_set(cfg, "zeta", "1.5") == TT_OK);
    EXPECT(tt_config_set(cfg, "corpus", "unused.jsonl") == TT_OK);
    EXPECT(tt_ingest(cfg) == TT_ERR_VALIDATION);
    tt_config_destroy(cfg);
}

static void check_pipeline(const char* dir) {
    char scenario[512], synth_dir[512], corpus[512], run_dir[512], models_dir[512], truth[512], metrics[512];
    snprintf(scenario, sizeof scenario, "%s/scenario.json", dir);
    snprintf(synth_dir, sizeof synth_dir, "%s/synth", dir);
    snprintf(corpus, sizeof corpus, "%s/synth/corpus.jsonl", dir);
    snprintf(run_dir, sizeof run_dir, "%s/run", dir);
    snprintf(models_dir, sizeof models_dir, "%s/run/models", dir);
    snprintf(truth, sizeof truth, "%s/synth/truth.json", dir);
    snprintf(metrics, sizeof metrics, "%s/metrics.json", dir);
    write_text(scenario,
               "{\"n_epochs\": 3, \"vocab_size\": 60, \"docs_per_epoch\": 20, \"tokens_per_doc\": 20,"
               " \"initial_topics\": 2, \"seed\": 4, \"script\": [{\"epoch\": 1, \"op\": \"birth\"}]}");
    EXPECT(tt_synth(scenario, synth_dir) == TT_OK);

    tt_config* cfg = NULL;
    EXPECT(tt_config_create(&cfg) == TT_OK);
    EXPECT(tt_config_set(cfg, "corpus", corpus) == TT_OK);
    EXPECT(tt_config_set(cfg, "out_dir", run_dir) == TT_OK);
    EXPECT(tt_config_set(cfg, "epoch_length", "1") == TT_OK);
    EXPECT(tt_config_set(cfg, "energy_fraction", "1") == TT_OK);
    EXPECT(tt_config_set(cfg, "sweeps", "20") == TT_OK);
    EXPECT(tt_config_set(cfg, "burn_in", "5") == TT_OK);
    EXPECT(tt_run_all(cfg) == TT_OK);

    const char* terms[1] = {"qaaaa"};
    const char* unknown[1] = {"zzzzz"};
    tt_status st = tt_trace(cfg, terms, 1, TT_BACKWARD);
    EXPECT(st == TT_OK || st == TT_ERR_VALIDATION);
    EXPECT(tt_trace(cfg, unknown, 1, TT_FORWARD) == TT_ERR_VALIDATION);
    EXPECT(strstr(tt_last_error(), "zzzzz") != NULL);
    EXPECT(tt_score(run_dir, truth, 0, metrics) == TT_OK);

    tt_models* models = NULL;
    EXPECT(tt_models_load(models_dir, &models) == TT_OK);
    EXPECT(tt_models_epoch_count(models) == 3);
    size_t k = 0;
    int epoch = -1;
    EXPECT(tt_models_topic_count(models, 0, &k) == TT_OK && k >= 1);
    EXPECT(tt_models_epoch_index(models, 2, &epoch) == TT_OK && epoch == 2);
    EXPECT(tt_models_topic_count(models, 7, &k) == TT_ERR_VALIDATION);

    tt_graph* loose = NULL;
    tt_graph* tight = NULL;
    EXPECT(tt_graph_build(models, TT_MEASURE_BHATTACHARYYA, 0.0, TT_CDF_GLOBAL, &loose) == TT_OK);
    EXPECT(tt_graph_build(models, TT_MEASURE_BHATTACHARYYA, 0.9, TT_CDF_GLOBAL, &tight) == TT_OK);
    EXPECT(tt_graph_edge_count(loose) == tt_graph_candidate_edge_count(loose));
    EXPECT(tt_graph_edge_count(tight) <= tt_graph_edge_count(loose));
    EXPECT(tt_graph_node_count(tight) == tt_graph_node_count(loose));
    size_t deaths = 0;
    EXPECT(tt_graph_event_count(tight, TT_EVENT_DEATH, &deaths) == TT_OK);
    double mean = 0.0;
    EXPECT(tt_graph_mean_lifespan(tight, 0, &mean) == TT_OK && mean >= 1.0);
    EXPECT(tt_graph_mean_lifespan(tight, 1, &mean) == TT_OK && mean >= 1.0);
    char* json = NULL;
    EXPECT(tt_graph_to_json(tight, &json) == TT_OK && strstr(json, "\"edges\"") != NULL);
    tt_string_free(json);
    EXPECT(tt_graph_build(models, TT_MEASURE_BHATTACHARYYA, 2.0, TT_CDF_GLOBAL, &loose) == TT_ERR_VALIDATION);

    tt_graph_destroy(tight);
    tt_graph_destroy(loose);
    tt_models_destroy(models);
    tt_config_destroy(cfg);
}

int main(void) {
    char dir[] = "/tmp/topictrace_capi_XXXXXX";
    if (!mkdtemp(dir)) {
        perror("mkdtemp");
        return 2;
    }
    EXPECT(strlen(tt_version()) > 0);
    check_similarity();
    check_config();
    check_pipeline(dir);
    char cmd[600];
    snprintf(cmd, sizeof cmd, "rm -rf '%s'", dir);
    if (system(cmd) != 0) fprintf(stderr, "could not remove %s\n", dir);
    if (failures) fprintf(stderr, "%d failed expectations\n", failures);
    else printf("all C interface checks passed\n");
    return failures ? 1 : 0;
}
