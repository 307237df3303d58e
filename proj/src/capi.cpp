#include "topictrace/topictrace.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "topictrace/errors.hpp"
#include "topictrace/io.hpp"
#include "topictrace/pipeline.hpp"

struct tt_config {
    topictrace::RunConfig value;
};

struct tt_models {
    std::vector<topictrace::EpochModel> value;
};

struct tt_graph {
    topictrace::TemporalGraph value;
    std::vector<topictrace::TopicEvent> events;
};

namespace {

thread_local std::string g_last_error;

template <class F>
tt_status guarded(F&& f) {
    try {
        g_last_error.clear();
        f();
        return TT_OK;
    } catch (const topictrace::ValidationError& e) {
        g_last_error = e.what();
        return TT_ERR_VALIDATION;
    } catch (const topictrace::IoError& e) {
        g_last_error = e.what();
        return TT_ERR_IO;
    } catch (const std::filesystem::filesystem_error& e) {
        g_last_error = e.what();
        return TT_ERR_IO;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TT_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return TT_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (!p) throw topictrace::ValidationError(std::string("null argument: ") + what);
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

topictrace::MeasureKind to_measure(tt_measure m) {
    switch (m) {
        case TT_MEASURE_HELLINGER: return topictrace::MeasureKind::Hellinger;
        case TT_MEASURE_BHATTACHARYYA: return topictrace::MeasureKind::Bhattacharyya;
        case TT_MEASURE_QUASI_JACCARD: return topictrace::MeasureKind::QuasiJaccard;
    }
    throw topictrace::ValidationError("unknown measure");
}

}  // namespace

extern "C" {

const char* tt_version(void) { return TOPICTRACE_VERSION; }

const char* tt_last_error(void) { return g_last_error.c_str(); }

void tt_string_free(char* s) { std::free(s); }

tt_status tt_config_create(tt_config** out) {
    return guarded([&] {
        require(out, "out");
        *out = new tt_config{};
    });
}

void tt_config_destroy(tt_config* cfg) { delete cfg; }

tt_status tt_config_load(tt_config* cfg, const char* json_path) {
    return guarded([&] {
        require(cfg, "cfg");
        require(json_path, "json_path");
        cfg->value = topictrace::config_from_json(topictrace::io::read_json(json_path), cfg->value);
    });
}

tt_status tt_config_set(tt_config* cfg, const char* key, const char* value) {
    return guarded([&] {
        require(cfg, "cfg");
        require(key, "key");
        require(value, "value");
        topictrace::set_config_value(cfg->value, key, value);
    });
}

tt_status tt_config_to_json(const tt_config* cfg, char** json_out) {
    return guarded([&] {
        require(cfg, "cfg");
        require(json_out, "json_out");
        *json_out = dup_string(topictrace::to_json(cfg->value).dump(1));
    });
}

tt_status tt_ingest(const tt_config* cfg) {
    return guarded([&] {
        require(cfg, "cfg");
        topictrace::cmd_ingest(cfg->value);
    });
}

tt_status tt_fit(const tt_config* cfg) {
    return guarded([&] {
        require(cfg, "cfg");
        topictrace::cmd_fit(cfg->value);
    });
}

tt_status tt_graph_stage(const tt_config* cfg) {
    return guarded([&] {
        require(cfg, "cfg");
        topictrace::cmd_graph(cfg->value);
    });
}

tt_status tt_trace(const tt_config* cfg, const char* const* terms, size_t n_terms,
                   tt_direction direction) {
    return guarded([&] {
        require(cfg, "cfg");
        if (n_terms > 0) require(terms, "terms");
        std::vector<std::string> list;
        for (size_t i = 0; i < n_terms; ++i) {
            require(terms[i], "terms[i]");
            list.emplace_back(terms[i]);
        }
        topictrace::cmd_trace(cfg->value, list,
                              direction == TT_FORWARD ? topictrace::Direction::Forward
                                                      : topictrace::Direction::Backward);
    });
}

tt_status tt_run_all(const tt_config* cfg) {
    return guarded([&] {
        require(cfg, "cfg");
        topictrace::cmd_run_all(cfg->value);
    });
}

tt_status tt_synth(const char* scenario_path, const char* out_dir) {
    return guarded([&] {
        require(scenario_path, "scenario_path");
        require(out_dir, "out_dir");
        topictrace::cmd_synth(scenario_path, out_dir);
    });
}

tt_status tt_score(const char* run_dir, const char* truth_path, int epoch_tolerance,
                   const char* out_path) {
    return guarded([&] {
        require(run_dir, "run_dir");
        require(truth_path, "truth_path");
        require(out_path, "out_path");
        topictrace::cmd_score(run_dir, truth_path, epoch_tolerance, out_path);
    });
}

tt_status tt_similarity(tt_measure measure, const double* p, const double* q, size_t n, double* out) {
    return guarded([&] {
        require(out, "out");
        if (n > 0) {
            require(p, "p");
            require(q, "q");
        }
        *out = topictrace::measure(to_measure(measure), std::span<const double>(p, n),
                                   std::span<const double>(q, n));
    });
}

tt_status tt_models_load(const char* models_dir, tt_models** out) {
    return guarded([&] {
        require(models_dir, "models_dir");
        require(out, "out");
        *out = new tt_models{topictrace::io::read_models(models_dir)};
    });
}

void tt_models_destroy(tt_models* models) { delete models; }

size_t tt_models_epoch_count(const tt_models* models) { return models ? models->value.size() : 0; }

tt_status tt_models_topic_count(const tt_models* models, size_t position, size_t* out) {
    return guarded([&] {
        require(models, "models");
        require(out, "out");
        if (position >= models->value.size()) throw topictrace::ValidationError("epoch position out of range");
        *out = models->value[position].num_topics();
    });
}

tt_status tt_models_epoch_index(const tt_models* models, size_t position, int* out) {
    return guarded([&] {
        require(models, "models");
        require(out, "out");
        if (position >= models->value.size()) throw topictrace::ValidationError("epoch position out of range");
        *out = models->value[position].epoch.index;
    });
}

tt_status tt_graph_build(const tt_models* models, tt_measure measure, double zeta, tt_cdf_scope scope,
                         tt_graph** out) {
    return guarded([&] {
        require(models, "models");
        require(out, "out");
        auto full = topictrace::build_full_graph(models->value, to_measure(measure));
        auto pruned = topictrace::prune(full, zeta,
                                        scope == TT_CDF_PER_PAIR ? topictrace::CdfScope::PerPair
                                                                 : topictrace::CdfScope::Global);
        auto events = topictrace::classify_events(pruned);
        *out = new tt_graph{std::move(pruned), std::move(events)};
    });
}

void tt_graph_destroy(tt_graph* graph) { delete graph; }

size_t tt_graph_node_count(const tt_graph* graph) { return graph ? graph->value.nodes().size() : 0; }

size_t tt_graph_edge_count(const tt_graph* graph) { return graph ? graph->value.edges().size() : 0; }

size_t tt_graph_candidate_edge_count(const tt_graph* graph) {
    return graph ? graph->value.candidate_edges : 0;
}

tt_status tt_graph_event_count(const tt_graph* graph, tt_event_kind kind, size_t* out) {
    return guarded([&] {
        require(graph, "graph");
        require(out, "out");
        if (kind < TT_EVENT_BIRTH || kind > TT_EVENT_MERGE) throw topictrace::ValidationError("unknown event kind");
        const auto k = static_cast<topictrace::EventKind>(kind);
        *out = static_cast<size_t>(std::count_if(graph->events.begin(), graph->events.end(),
                                                 [&](const auto& e) { return e.kind == k; }));
    });
}

tt_status tt_graph_mean_lifespan(const tt_graph* graph, int sole_parent_rule, double* out) {
    return guarded([&] {
        require(graph, "graph");
        require(out, "out");
        const auto records = topictrace::lifespans(
            graph->value, sole_parent_rule ? topictrace::LifespanRule::SoleParent
                                           : topictrace::LifespanRule::MaxSimilarity);
        *out = topictrace::mean_lifespan(records);
    });
}

tt_status tt_graph_to_json(const tt_graph* graph, char** json_out) {
    return guarded([&] {
        require(graph, "graph");
        require(json_out, "json_out");
        *json_out = dup_string(topictrace::io::graph_to_json(graph->value, nlohmann::json::object()).dump(1));
    });
}

}  // extern "C"
