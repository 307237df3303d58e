#include <doctest.h>

#include <fstream>

#include "support.hpp"
#include "topictrace/errors.hpp"
#include "topictrace/io.hpp"

using namespace topictrace;
using nlohmann::json;

namespace {

Date ymd(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

EncodedCorpus sample_corpus() {
    EncodedCorpus c;
    c.vocab.terms = {"gene", "autism", "brain"};
    c.vocab.counts = {5, 3, 1};
    for (std::uint32_t i = 0; i < 3; ++i) c.vocab.index[c.vocab.terms[i]] = i;
    c.vocab.energy_fraction = 0.9;
    c.documents = {{"a", ymd(1999, 3, 4), {0, 1, 0}}, {"b, \"quoted\"", ymd(2001, 12, 31), {2}}};
    return c;
}

EpochModel sample_model() {
    EpochModel m;
    m.epoch = {2, ymd(2000, 1, 1), ymd(2005, 1, 1), {}};
    m.num_documents = 7;
    m.topics = {{{2, 0}, {0.5, 0.25, 0.25, 0.0}, 0.75}, {{2, 1}, {0.1, 0.2, 0.3, 0.4}, 0.25}};
    m.loglik_trace = {-10.5, -9.25};
    return m;
}

}  // namespace

TEST_CASE("corpus binary round trip") {
    testsupport::TempDir dir("io_1");
    const auto c = sample_corpus();
    io::write_corpus_bin(dir.path() / "corpus.bin", c, json{{"seed", 3}});
    const auto back = io::read_corpus_bin(dir.path() / "corpus.bin");
    CHECK(back.vocab.terms == c.vocab.terms);
    CHECK(back.vocab.counts == c.vocab.counts);
    CHECK(back.vocab.find("brain") == 2u);
    REQUIRE(back.documents.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.documents[i].id == c.documents[i].id);
        CHECK(back.documents[i].timestamp == c.documents[i].timestamp);
        CHECK(back.documents[i].tokens == c.documents[i].tokens);
    }
}

TEST_CASE("corpus binary rejects other files") {
    testsupport::TempDir dir("io_2");
    testsupport::write_file(dir.path() / "junk.bin", "not a corpus at all");
    CHECK_THROWS_AS(io::read_corpus_bin(dir.path() / "junk.bin"), ValidationError);
}

TEST_CASE("vocabulary csv round trip") {
    testsupport::TempDir dir("io_3");
    const auto c = sample_corpus();
    const auto text = io::vocab_csv(c.vocab, json{{"seed", 3}});
    CHECK(text.rfind("# config: ", 0) == 0);
    testsupport::write_file(dir.path() / "vocab.csv", text);
    const auto back = io::read_vocab_csv(dir.path() / "vocab.csv");
    CHECK(back.terms == c.vocab.terms);
    CHECK(back.counts == c.vocab.counts);
}

TEST_CASE("model json round trip with elision") {
    auto m = sample_model();
    m.topics[0].phi = {0.5, 0.5 - 4e-7, 2e-7, 2e-7};
    const auto j = io::model_to_json(m, 4, json::object());
    CHECK(j.at("K") == 2);
    CHECK(j.at("topics").at(0).at("phi").size() == 2);
    const auto back = io::model_from_json(j);
    CHECK(back.epoch.index == 2);
    CHECK(back.epoch.start == m.epoch.start);
    CHECK(back.epoch.end == m.epoch.end);
    CHECK(back.num_documents == 7);
    CHECK(back.loglik_trace == m.loglik_trace);
    REQUIRE(back.topics.size() == 2);
    CHECK(back.topics[0].phi[2] == doctest::Approx(2e-7));
    CHECK(back.topics[0].phi[3] == doctest::Approx(2e-7));
    for (std::size_t w = 0; w < 4; ++w) CHECK(back.topics[1].phi[w] == doctest::Approx(m.topics[1].phi[w]));
    CHECK(back.topics[0].popularity == 0.75);
    CHECK(back.topics[1].id == TopicId{2, 1});
}

TEST_CASE("model files are read in epoch order") {
    testsupport::TempDir dir("io_4");
    auto a = sample_model();
    auto b = sample_model();
    b.epoch.index = 10;
    for (auto& t : b.topics) t.id.epoch = 10;
    io::write_json(dir.path() / io::model_file_name(10), io::model_to_json(b, 4, json::object()));
    io::write_json(dir.path() / io::model_file_name(2), io::model_to_json(a, 4, json::object()));
    const auto models = io::read_models(dir.path());
    REQUIRE(models.size() == 2);
    CHECK(models[0].epoch.index == 2);
    CHECK(models[1].epoch.index == 10);
}

TEST_CASE("graph json round trip") {
    std::vector<GraphNode> nodes{{{0, 0}, 0, 0.6}, {{0, 1}, 0, 0.4}, {{3, 0}, 1, 1.0}};
    std::vector<GraphEdge> edges{{0, 2, 0.9}, {1, 2, 0.25}};
    TemporalGraph g(nodes, edges);
    g.measure = MeasureKind::QuasiJaccard;
    g.zeta = 0.5;
    g.pruned = true;
    g.thresholds = {0.25};
    const auto back = io::graph_from_json(io::graph_to_json(g, json::object()));
    CHECK(back.measure == MeasureKind::QuasiJaccard);
    CHECK(back.zeta == 0.5);
    REQUIRE(back.nodes().size() == 3);
    CHECK(back.nodes()[2].id == TopicId{3, 0});
    REQUIRE(back.edges().size() == 2);
    CHECK(back.edges()[1].weight == 0.25);
    CHECK(back.nodes()[back.edges()[1].from].id == TopicId{0, 1});
}

TEST_CASE("events csv round trip") {
    testsupport::TempDir dir("io_5");
    const std::vector<TopicEvent> events{{{1, 0}, EventKind::Birth, {}}, {{1, 2}, EventKind::Merge, {{0, 0}, {0, 3}}}};
    const auto text = io::events_csv(events, json{{"zeta", 0.9}});
    testsupport::write_file(dir.path() / "events.csv", text);
    const auto back = io::read_events_csv(dir.path() / "events.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].node == TopicId{1, 0});
    CHECK(back[0].kind == EventKind::Birth);
    CHECK(back[1].partners == events[1].partners);
}

TEST_CASE("csv headers") {
    const json cfg{{"seed", 1}};
    const std::vector<EventRates> rates{{3, 4, 0.25, 0.0, 0.0, 0.5}};
    const auto r = io::rates_csv(rates, cfg);
    CHECK(r.find("epoch,K,births,deaths,merges,splits\n3,4,") != std::string::npos);
    const auto c = io::cdf_csv(empirical_cdf({0.2, 0.4}), cfg);
    CHECK(c.find("value,cdf\n") != std::string::npos);
    CHECK(io::provenance_line(cfg) == "# config: {\"seed\":1}\n");
}
