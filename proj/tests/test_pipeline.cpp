#include <doctest.h>

#include "support.hpp"
#include "topictrace/errors.hpp"
#include "topictrace/io.hpp"
#include "topictrace/pipeline.hpp"

using namespace topictrace;

namespace {

RunConfig synthetic_run(const testsupport::TempDir& dir) {
    Scenario sc;
    sc.n_epochs = 3;
    sc.vocab_size = 60;
    sc.docs_per_epoch = 25;
    sc.tokens_per_doc = 20;
    sc.initial_topics = 2;
    sc.epoch_years = 2;
    sc.script = {{1, DirectiveKind::Birth, {}, 0.0}};
    sc.seed = 8;
    io::write_json(dir.path() / "scenario.json", to_json(sc));
    cmd_synth(dir.path() / "scenario.json", dir.path() / "synth");

    RunConfig cfg;
    cfg.corpus = (dir.path() / "synth" / "corpus.jsonl").string();
    cfg.out_dir = (dir.path() / "run").string();
    cfg.energy_fraction = 1.0;
    cfg.epoch_length = 2;
    cfg.sweeps = 30;
    cfg.burn_in = 10;
    cfg.zeta = 0.5;
    return cfg;
}

}  // namespace

TEST_CASE("config defaults and validation") {
    RunConfig cfg;
    cfg.corpus = "x.jsonl";
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.measure == MeasureKind::Bhattacharyya);

    auto bad = cfg;
    bad.epoch_overlap = bad.epoch_length;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = cfg;
    bad.zeta = 1.5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = cfg;
    bad.burn_in = bad.sweeps;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = cfg;
    bad.energy_fraction = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = cfg;
    bad.jobs = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("config json round trip and overrides") {
    RunConfig cfg;
    cfg.corpus = "c.jsonl";
    cfg.zeta = 0.9;
    cfg.measure = MeasureKind::Hellinger;
    cfg.cdf_scope = CdfScope::PerPair;
    const auto back = config_from_json(to_json(cfg));
    CHECK(to_json(back) == to_json(cfg));

    set_config_value(cfg, "epoch_length", "10");
    set_config_value(cfg, "measure", "quasi-jaccard");
    set_config_value(cfg, "seed", "42");
    CHECK(cfg.epoch_length == 10);
    CHECK(cfg.measure == MeasureKind::QuasiJaccard);
    CHECK(cfg.seed == 42);
    CHECK_THROWS_AS(set_config_value(cfg, "no_such_key", "1"), ValidationError);
    CHECK_THROWS_AS(set_config_value(cfg, "zeta", "abc"), ValidationError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"bogus", 1}}), ValidationError);
}

TEST_CASE("stage by stage run over a synthetic corpus") {
    testsupport::TempDir dir("pipeline_1");
    const auto cfg = synthetic_run(dir);
    const auto ingest = cmd_ingest(cfg);
    CHECK(ingest.documents == 75);
    CHECK(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / "corpus.bin"));
    const auto fit = cmd_fit(cfg);
    CHECK(fit.topics_per_epoch.size() == 3);
    const auto graph = cmd_graph(cfg);
    CHECK(graph.kept_edges <= graph.candidate_edges);
    for (const char* f : {"graph.json", "events.csv", "rates.csv", "cdf.csv", "lifespans.csv", "graph.dot"})
        CHECK(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / "graph" / f));

    const auto vocab = io::read_vocab_csv(std::filesystem::path(cfg.out_dir) / "vocab.csv");
    const std::vector<std::string> terms{vocab.terms[0]};
    const auto root = cmd_trace(cfg, terms, Direction::Backward);
    CHECK(root.epoch >= 0);
    CHECK(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / "trace" / "trace_backward.dot"));

    const auto scores = cmd_score(cfg.out_dir, dir.path() / "synth" / "truth.json", 0, dir.path() / "metrics.json");
    CHECK(scores.at(EventKind::Birth).truth_count == 1);
    CHECK(std::filesystem::exists(dir.path() / "metrics.json"));
}

TEST_CASE("outputs carry the config") {
    testsupport::TempDir dir("pipeline_2");
    const auto cfg = synthetic_run(dir);
    cmd_run_all(cfg);
    const auto rates = testsupport::read_file(std::filesystem::path(cfg.out_dir) / "graph" / "rates.csv");
    CHECK(rates.rfind("# config: ", 0) == 0);
    const auto model = io::read_json(std::filesystem::path(cfg.out_dir) / "models" / io::model_file_name(0));
    CHECK(model.at("config").at("seed") == cfg.seed);
}

TEST_CASE("top terms") {
    Vocabulary vocab;
    vocab.terms = {"a", "b", "c"};
    const Topic t{{0, 0}, {0.2, 0.5, 0.3}, 1.0};
    CHECK(top_terms(t, vocab, 2) == std::vector<std::string>{"b", "c"});
    CHECK(top_terms(t, vocab, 5).size() == 3);
}
