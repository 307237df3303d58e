#include "topictrace/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "topictrace/errors.hpp"
#include "topictrace/io.hpp"

namespace topictrace {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::optional<Date> parse_origin(const std::string& s) {
    if (s.empty()) return std::nullopt;
    if (s.size() == 4) return parse_date(s + "-01-01");
    return parse_date(s);
}

const char* kKeys[] = {"corpus", "stopwords", "lemma_map", "out_dir", "in_dir",
                       "energy_fraction", "epoch_length", "epoch_overlap", "origin", "gamma",
                       "alpha0", "eta", "sweeps", "burn_in", "measure", "zeta", "seed",
                       "cdf_scope", "jobs"};

}  // namespace

Hyperparameters RunConfig::hyperparameters() const { return {gamma, alpha0, eta, seed}; }

EpochSpec RunConfig::epoch_spec() const {
    EpochSpec spec{epoch_length, epoch_overlap, std::nullopt};
    if (!origin.empty()) {
        spec.origin = parse_origin(origin);
        if (!spec.origin) throw ValidationError("bad epoch origin '" + origin + "' (YYYY or YYYY-MM-DD)");
    }
    return spec;
}

FitOptions RunConfig::fit_options() const { return {sweeps, burn_in}; }

void RunConfig::validate() const {
    if (!(energy_fraction > 0.0 && energy_fraction <= 1.0))
        throw ValidationError("energy_fraction must lie in (0, 1]");
    epoch_spec().validate();
    hyperparameters().validate();
    fit_options().validate();
    validate_zeta(zeta);
    if (jobs < 1) throw ValidationError("jobs must be at least 1");
    if (out_dir.empty()) throw ValidationError("out_dir must not be empty");
}

json to_json(const RunConfig& c) {
    return json{{"corpus", c.corpus},
                {"stopwords", c.stopwords},
                {"lemma_map", c.lemma_map},
                {"out_dir", c.out_dir},
                {"in_dir", c.in_dir},
                {"energy_fraction", c.energy_fraction},
                {"epoch_length", c.epoch_length},
                {"epoch_overlap", c.epoch_overlap},
                {"origin", c.origin},
                {"gamma", c.gamma},
                {"alpha0", c.alpha0},
                {"eta", c.eta},
                {"sweeps", c.sweeps},
                {"burn_in", c.burn_in},
                {"measure", std::string(to_string(c.measure))},
                {"zeta", c.zeta},
                {"seed", c.seed},
                {"cdf_scope", std::string(to_string(c.cdf_scope))},
                {"jobs", c.jobs}};
}

RunConfig config_from_json(const json& j, RunConfig c) {
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys))
            throw ValidationError("unknown config key: " + key);
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("corpus", c.corpus);
        get("stopwords", c.stopwords);
        get("lemma_map", c.lemma_map);
        get("out_dir", c.out_dir);
        get("in_dir", c.in_dir);
        get("energy_fraction", c.energy_fraction);
        get("epoch_length", c.epoch_length);
        get("epoch_overlap", c.epoch_overlap);
        if (j.contains("origin")) {
            const auto& o = j.at("origin");
            c.origin = o.is_number_integer() ? std::to_string(o.get<int>()) : o.get<std::string>();
        }
        get("gamma", c.gamma);
        get("alpha0", c.alpha0);
        get("eta", c.eta);
        get("sweeps", c.sweeps);
        get("burn_in", c.burn_in);
        get("zeta", c.zeta);
        get("seed", c.seed);
        get("jobs", c.jobs);
        if (j.contains("measure")) {
            auto m = parse_measure(j.at("measure").get<std::string>());
            if (!m) throw ValidationError("unknown measure: " + j.at("measure").get<std::string>());
            c.measure = *m;
        }
        if (j.contains("cdf_scope")) {
            auto s = parse_cdf_scope(j.at("cdf_scope").get<std::string>());
            if (!s) throw ValidationError("unknown cdf_scope: " + j.at("cdf_scope").get<std::string>());
            c.cdf_scope = *s;
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad config value: ") + e.what());
    }
    return c;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    json current = to_json(cfg);
    if (!current.contains(key)) throw ValidationError("unknown config key: " + key);
    json patch;
    const auto& slot = current.at(key);
    if (slot.is_string()) {
        patch[key] = value;
    } else {
        json parsed = json::parse(value, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_number())
            throw ValidationError("config key " + key + " expects a number, got '" + value + "'");
        patch[key] = parsed;
    }
    cfg = config_from_json(patch, cfg);
}

std::vector<std::string> top_terms(const Topic& topic, const Vocabulary& vocab, std::size_t n) {
    std::vector<std::size_t> order(topic.phi.size());
    std::iota(order.begin(), order.end(), 0);
    n = std::min(n, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          return topic.phi[a] != topic.phi[b] ? topic.phi[a] > topic.phi[b] : a < b;
                      });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(order[i] < vocab.size() ? vocab.terms[order[i]] : std::to_string(order[i]));
    return out;
}

IngestSummary cmd_ingest(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.corpus.empty()) throw ValidationError("no corpus file given");
    const json config = to_json(cfg);
    auto raw = ingest(cfg.corpus);

    const TermSet stopwords = cfg.stopwords.empty() ? default_stopwords() : load_stopwords(cfg.stopwords);
    std::optional<LemmaMap> lemmas;
    if (!cfg.lemma_map.empty()) lemmas = load_lemma_map(cfg.lemma_map);

    std::vector<std::vector<std::string>> normalized;
    normalized.reserve(raw.documents.size());
    for (const auto& d : raw.documents)
        normalized.push_back(normalize(d.text, stopwords, lemmas ? &*lemmas : nullptr));

    EncodedCorpus corpus;
    corpus.vocab = build_vocabulary(normalized, cfg.energy_fraction);
    corpus.documents = encode(raw.documents, normalized, corpus.vocab, raw.report);
    if (corpus.documents.empty()) throw ValidationError("every document is empty after encoding");

    const fs::path out = cfg.out_dir;
    io::write_corpus_bin(out / "corpus.bin", corpus, config);
    io::write_text(out / "vocab.csv", io::vocab_csv(corpus.vocab, config));
    io::write_json(out / "report.json", json{{"config", config},
                                             {"lines", raw.report.lines},
                                             {"malformed", raw.report.malformed},
                                             {"duplicates", raw.report.duplicates},
                                             {"dropped_empty", raw.report.dropped_empty},
                                             {"documents", corpus.documents.size()},
                                             {"vocab_size", corpus.vocab.size()},
                                             {"total_terms", std::accumulate(corpus.vocab.counts.begin(), corpus.vocab.counts.end(), std::uint64_t{0})}});
    return {raw.report, corpus.documents.size(), corpus.vocab.size()};
}

FitSummary cmd_fit(const RunConfig& cfg) {
    cfg.validate();
    const json config = to_json(cfg);
    const auto corpus = io::read_corpus_bin(cfg.input_dir() / "corpus.bin");
    const auto epochs = slice_epochs(corpus.documents, cfg.epoch_spec());
    auto fitted = fit_all_epochs(corpus.documents, epochs, corpus.vocab.size(), cfg.hyperparameters(),
                                 cfg.fit_options(), cfg.jobs);

    const fs::path dir = fs::path(cfg.out_dir) / "models";
    std::error_code ec;
    if (fs::is_directory(dir, ec))
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.path().filename().string().starts_with("epoch_")) fs::remove(entry.path(), ec);
    FitSummary summary;
    summary.warnings = std::move(fitted.warnings);
    for (const auto& m : fitted.models) {
        io::write_json(dir / io::model_file_name(m.epoch.index),
                       io::model_to_json(m, corpus.vocab.size(), config));
        summary.topics_per_epoch.push_back(static_cast<int>(m.num_topics()));
    }
    // later stages read the vocabulary next to the models
    const fs::path vocab_out = fs::path(cfg.out_dir) / "vocab.csv";
    if (!fs::exists(vocab_out, ec) || !fs::equivalent(cfg.input_dir() / "vocab.csv", vocab_out, ec))
        fs::copy_file(cfg.input_dir() / "vocab.csv", vocab_out, fs::copy_options::overwrite_existing);
    return summary;
}

GraphSummary cmd_graph(const RunConfig& cfg) {
    cfg.validate();
    const json config = to_json(cfg);
    const auto in = cfg.input_dir();
    const auto models = io::read_models(in / "models");
    const auto full = build_full_graph(models, cfg.measure);
    const auto vocab = io::read_vocab_csv(in / "vocab.csv");

    const auto pruned = prune(full, cfg.zeta, cfg.cdf_scope);
    const auto events = classify_events(pruned);
    const auto rates = event_rates(events, pruned);
    auto records = lifespans(pruned, LifespanRule::MaxSimilarity);
    auto sole = lifespans(pruned, LifespanRule::SoleParent);
    records.insert(records.end(), sole.begin(), sole.end());

    std::map<TopicId, std::string> labels;
    for (const auto& m : models)
        for (const auto& t : m.topics) {
            std::string label;
            for (const auto& term : top_terms(t, vocab, 3)) label += (label.empty() ? "" : " ") + term;
            labels[t.id] = label;
        }

    const fs::path out = fs::path(cfg.out_dir) / "graph";
    io::write_json(out / "graph.json", io::graph_to_json(pruned, config));
    io::write_text(out / "events.csv", io::events_csv(events, config));
    io::write_text(out / "rates.csv", io::rates_csv(rates, config));
    io::write_text(out / "cdf.csv", io::cdf_csv(EmpiricalCDF(edge_weights(full)), config));
    io::write_text(out / "lifespans.csv", io::lifespans_csv(records, config));
    io::write_text(out / "graph.dot", "// config: " + config.dump() + "\n" + to_dot(pruned, labels));
    return {full.edges().size(), pruned.edges().size(), pruned.thresholds, events.size()};
}

TopicId cmd_trace(const RunConfig& cfg, const std::vector<std::string>& terms, Direction direction) {
    cfg.validate();
    if (terms.empty()) throw ValidationError("trace needs at least one term");
    const json config = to_json(cfg);
    const auto in = cfg.input_dir();
    const auto models = io::read_models(in / "models");
    const auto vocab = io::read_vocab_csv(in / "vocab.csv");
    const auto graph = io::graph_from_json(io::read_json(in / "graph" / "graph.json"));

    const TopicId root = find_topic_by_terms(models, terms, vocab);
    const auto sub = trace(graph, root, direction);

    std::map<TopicId, std::string> labels;
    for (const auto& m : models)
        for (const auto& t : m.topics) {
            if (!sub.find(t.id)) continue;
            std::string label;
            for (const auto& term : top_terms(t, vocab, 3)) label += (label.empty() ? "" : " ") + term;
            labels[t.id] = label;
        }

    const std::string dir_name = direction == Direction::Forward ? "forward" : "backward";
    json j = io::graph_to_json(sub, config);
    j["query"] = {{"terms", terms}, {"direction", dir_name}};
    j["root"] = {root.epoch, root.k};
    const fs::path out = fs::path(cfg.out_dir) / "trace";
    io::write_json(out / ("trace_" + dir_name + ".json"), j);
    io::write_text(out / ("trace_" + dir_name + ".dot"),
                   "// config: " + config.dump() + "\n" + to_dot(sub, labels));
    return root;
}

void cmd_synth(const fs::path& scenario_path, const fs::path& out_dir) {
    const auto scenario = scenario_from_json(io::read_json(scenario_path));
    const auto corpus = generate(scenario);
    std::string lines;
    for (const auto& d : corpus.documents)
        lines += json{{"id", d.id}, {"date", format_date(d.timestamp)}, {"text", d.text}}.dump() + "\n";
    io::write_text(out_dir / "corpus.jsonl", lines);
    json truth = to_json(corpus.truth);
    truth["scenario"] = to_json(scenario);
    io::write_json(out_dir / "truth.json", truth);
}

EventScores cmd_score(const fs::path& run_dir, const fs::path& truth_path, int epoch_tolerance,
                      const fs::path& out_path) {
    if (epoch_tolerance < 0) throw ValidationError("epoch tolerance must be non-negative");
    const auto models = io::read_models(run_dir / "models");
    const auto vocab = io::read_vocab_csv(run_dir / "vocab.csv");
    const auto events = io::read_events_csv(run_dir / "graph" / "events.csv");
    const auto truth = ground_truth_from_json(io::read_json(truth_path));
    auto scores = score_events(events, models, vocab, truth, epoch_tolerance);
    io::write_json(out_path, json{{"run_dir", run_dir.string()},
                                  {"truth", truth_path.string()},
                                  {"epoch_tolerance", epoch_tolerance},
                                  {"scores", to_json(scores)}});
    return scores;
}

void cmd_run_all(const RunConfig& cfg) {
    RunConfig local = cfg;
    local.in_dir.clear();
    local.validate();
    cmd_ingest(local);
    cmd_fit(local);
    cmd_graph(local);
}

}  // namespace topictrace
