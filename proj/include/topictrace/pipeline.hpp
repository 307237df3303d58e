#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "topictrace/corpus.hpp"
#include "topictrace/graph.hpp"
#include "topictrace/hdp.hpp"
#include "topictrace/similarity.hpp"
#include "topictrace/synthgen.hpp"

namespace topictrace {

// Every knob of the pipeline. Serialized into each output file.
struct RunConfig {
    std::string corpus;     // JSON Lines input
    std::string stopwords;  // empty: built-in list
    std::string lemma_map;  // empty: no lemmatization
    std::string out_dir = "out";
    std::string in_dir;     // where fit/graph/trace read earlier stages; empty: out_dir
    double energy_fraction = 0.9;
    int epoch_length = 5;
    int epoch_overlap = 0;
    std::string origin;     // "YYYY" or "YYYY-MM-DD"; empty: earliest document year
    double gamma = 1.0;
    double alpha0 = 1.0;
    double eta = 0.01;
    int sweeps = 500;
    int burn_in = 300;
    MeasureKind measure = MeasureKind::Bhattacharyya;
    double zeta = 0.95;
    std::uint64_t seed = 1;
    CdfScope cdf_scope = CdfScope::Global;
    int jobs = 1;

    std::filesystem::path input_dir() const { return in_dir.empty() ? out_dir : in_dir; }
    Hyperparameters hyperparameters() const;
    EpochSpec epoch_spec() const;
    FitOptions fit_options() const;

    // Checks every value against the module preconditions (ValidationError).
    void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
// Applies one "key=value"-style override using the JSON key names.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

struct IngestSummary {
    IngestReport report;
    std::size_t documents = 0;
    std::size_t vocab_size = 0;
};

struct FitSummary {
    std::vector<int> topics_per_epoch;
    std::vector<std::string> warnings;
};

struct GraphSummary {
    std::size_t candidate_edges = 0;
    std::size_t kept_edges = 0;
    std::vector<double> thresholds;
    std::size_t events = 0;
};

// out/corpus.bin, out/vocab.csv, out/report.json
IngestSummary cmd_ingest(const RunConfig& cfg);
// in/corpus.bin -> out/models/epoch_NNN.json
FitSummary cmd_fit(const RunConfig& cfg);
// in/models + in/vocab.csv -> out/graph/{graph.json,events.csv,rates.csv,cdf.csv,lifespans.csv,graph.dot}
GraphSummary cmd_graph(const RunConfig& cfg);
// in/models + in/vocab.csv + in/graph/graph.json -> out/trace/trace_<direction>.{json,dot}
TopicId cmd_trace(const RunConfig& cfg, const std::vector<std::string>& terms, Direction direction);
// scenario JSON -> out/corpus.jsonl + out/truth.json
void cmd_synth(const std::filesystem::path& scenario, const std::filesystem::path& out_dir);
// run dir (models, vocab.csv, graph/events.csv) + truth.json -> metrics.json
EventScores cmd_score(const std::filesystem::path& run_dir, const std::filesystem::path& truth,
                      int epoch_tolerance, const std::filesystem::path& out_path);
// ingest -> fit -> graph, all inside out_dir
void cmd_run_all(const RunConfig& cfg);

// Top terms of a topic, most probable first.
std::vector<std::string> top_terms(const Topic& topic, const Vocabulary& vocab, std::size_t n);

}  // namespace topictrace
