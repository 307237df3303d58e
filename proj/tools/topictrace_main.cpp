// Command-line front end. Talks to the library only through the C API.
#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topictrace/topictrace.h"

namespace {

// Exit codes: 0 ok, 1 validation, 2 I/O, 3 internal.
int report(tt_status status) {
    if (status != TT_OK) std::fprintf(stderr, "topictrace: error: %s\n", tt_last_error());
    return static_cast<int>(status);
}

struct ConfigFlags {
    std::string config_file;
    std::map<std::string, std::string> values;  // config key -> flag value
};

// Registers --flag options that override config keys of the same meaning.
void add_config_flags(CLI::App* cmd, ConfigFlags& flags, const std::vector<std::pair<std::string, std::string>>& keys) {
    cmd->add_option("--config", flags.config_file, "JSON config file; flags override its values");
    for (const auto& [flag, key] : keys) {
        cmd->add_option_function<std::string>(
            "--" + flag, [&flags, key = key](const std::string& v) { flags.values[key] = v; },
            "sets config key '" + key + "'");
    }
}

const std::vector<std::pair<std::string, std::string>> kIngestKeys = {
    {"corpus", "corpus"}, {"stopwords", "stopwords"}, {"lemma-map", "lemma_map"},
    {"out", "out_dir"},   {"energy-fraction", "energy_fraction"}};

const std::vector<std::pair<std::string, std::string>> kFitKeys = {
    {"in", "in_dir"},       {"out", "out_dir"},     {"epoch-length", "epoch_length"},
    {"epoch-overlap", "epoch_overlap"}, {"origin", "origin"}, {"gamma", "gamma"},
    {"alpha0", "alpha0"},   {"eta", "eta"},         {"sweeps", "sweeps"},
    {"burn-in", "burn_in"}, {"seed", "seed"},       {"jobs", "jobs"}};

const std::vector<std::pair<std::string, std::string>> kGraphKeys = {
    {"in", "in_dir"}, {"out", "out_dir"}, {"measure", "measure"}, {"zeta", "zeta"},
    {"cdf-scope", "cdf_scope"}};

std::vector<std::pair<std::string, std::string>> merged(
    std::initializer_list<const std::vector<std::pair<std::string, std::string>>*> lists) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto* l : lists)
        for (const auto& kv : *l)
            if (std::find(out.begin(), out.end(), kv) == out.end()) out.push_back(kv);
    return out;
}

class Config {
public:
    Config() {
        if (tt_config_create(&cfg_) != TT_OK) cfg_ = nullptr;
    }
    ~Config() { tt_config_destroy(cfg_); }
    Config(const Config&) = delete;
    Config& operator=(const Config&) = delete;

    tt_status apply(const ConfigFlags& flags) {
        if (!cfg_) return TT_ERR_INTERNAL;
        if (!flags.config_file.empty())
            if (auto s = tt_config_load(cfg_, flags.config_file.c_str()); s != TT_OK) return s;
        for (const auto& [key, value] : flags.values)
            if (auto s = tt_config_set(cfg_, key.c_str(), value.c_str()); s != TT_OK) return s;
        return TT_OK;
    }
    const tt_config* get() const { return cfg_; }

private:
    tt_config* cfg_ = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topic evolution tracking over timestamped corpora"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tt_version());

    ConfigFlags ingest_flags, fit_flags, graph_flags, trace_flags, run_flags;

    auto* ingest = app.add_subcommand("ingest", "Tokenize, build the vocabulary and encode a JSONL corpus");
    add_config_flags(ingest, ingest_flags, kIngestKeys);

    auto* fit = app.add_subcommand("fit", "Slice epochs and fit one HDP per epoch");
    add_config_flags(fit, fit_flags, kFitKeys);

    auto* graph = app.add_subcommand("graph", "Build and prune the temporal graph; classify events");
    add_config_flags(graph, graph_flags, kGraphKeys);

    std::vector<std::string> terms;
    std::string direction = "backward";
    auto* trace = app.add_subcommand("trace", "Find the topic best matching terms and trace it");
    add_config_flags(trace, trace_flags, {{"in", "in_dir"}, {"out", "out_dir"}});
    trace->add_option("--terms", terms, "query terms")->required()->delimiter(',');
    trace->add_option("--direction", direction, "forward or backward")
        ->check(CLI::IsMember({"forward", "backward"}));

    auto* run_all = app.add_subcommand("run-all", "ingest, fit and graph in one go");
    add_config_flags(run_all, run_flags, merged({&kIngestKeys, &kFitKeys, &kGraphKeys}));

    std::string scenario, synth_out;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
    synth->add_option("--scenario", scenario, "scenario JSON")->required();
    synth->add_option("--out", synth_out, "output directory")->required();

    std::string detected, truth, metrics_out;
    int tolerance = 0;
    auto* score = app.add_subcommand("score", "Score detected events against ground truth");
    score->add_option("--detected", detected, "run directory with models/, vocab.csv, graph/")->required();
    score->add_option("--truth", truth, "truth.json from synth")->required();
    score->add_option("--tolerance", tolerance, "epoch tolerance when matching events");
    score->add_option("--out", metrics_out, "metrics JSON path (default <detected>/metrics.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    auto run_stage = [](const ConfigFlags& flags, tt_status (*stage)(const tt_config*)) {
        Config cfg;
        if (auto s = cfg.apply(flags); s != TT_OK) return report(s);
        return report(stage(cfg.get()));
    };

    if (*ingest) return run_stage(ingest_flags, tt_ingest);
    if (*fit) return run_stage(fit_flags, tt_fit);
    if (*graph) return run_stage(graph_flags, tt_graph_stage);
    if (*run_all) return run_stage(run_flags, tt_run_all);
    if (*trace) {
        Config cfg;
        if (auto s = cfg.apply(trace_flags); s != TT_OK) return report(s);
        std::vector<const char*> ptrs;
        for (const auto& t : terms) ptrs.push_back(t.c_str());
        return report(tt_trace(cfg.get(), ptrs.data(), ptrs.size(),
                               direction == "forward" ? TT_FORWARD : TT_BACKWARD));
    }
    if (*synth) return report(tt_synth(scenario.c_str(), synth_out.c_str()));
    if (*score) {
        if (metrics_out.empty()) metrics_out = detected + "/metrics.json";
        return report(tt_score(detected.c_str(), truth.c_str(), tolerance, metrics_out.c_str()));
    }
    return 1;
}
