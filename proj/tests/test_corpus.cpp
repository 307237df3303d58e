#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "support.hpp"
#include "topictrace/corpus.hpp"
#include "topictrace/errors.hpp"
#include "topictrace/random.hpp"

using namespace topictrace;
using namespace std::chrono;
using Tokens = std::vector<std::string>;

namespace {

EncodedDocument doc_on(const std::string& id, int y, unsigned m, unsigned d) {
    return {id, Date{year{y}, month{m}, day{d}}, {0}};
}

std::vector<std::vector<std::string>> docs_with_counts(const std::map<std::string, int>& counts) {
    std::vector<std::string> doc;
    for (const auto& [t, n] : counts)
        for (int i = 0; i < n; ++i) doc.push_back(t);
    return {doc};
}

}  // namespace

TEST_CASE("date parsing is strict") {
    CHECK(parse_date("2001-02-28").has_value());
    CHECK(format_date(*parse_date("1946-01-05")) == "1946-01-05");
    CHECK_FALSE(parse_date("2001-02-29").has_value());
    CHECK_FALSE(parse_date("2001-2-28").has_value());
    CHECK_FALSE(parse_date("2001/02/28").has_value());
    CHECK_FALSE(parse_date("").has_value());
    CHECK_FALSE(parse_date("2001-02-2x").has_value());
}

TEST_CASE("ingest valid lines") {
    testsupport::TempDir dir("ingest_valid");
    testsupport::write_file(dir / "c.jsonl",
                            "{\"id\":\"a\",\"date\":\"2000-01-01\",\"text\":\"alpha beta\"}\n"
                            "{\"id\":\"b\",\"date\":\"2000-06-01\",\"text\":\"gamma\"}\n"
                            "{\"id\":\"c\",\"date\":\"2001-01-01\",\"text\":\"delta\"}\n");
    const auto r = ingest(dir / "c.jsonl");
    CHECK(r.documents.size() == 3);
    CHECK(r.report.malformed == 0);
    CHECK(r.report.lines == 3);
    CHECK(r.documents[1].id == "b");
    CHECK(r.documents[1].text == "gamma");
}

TEST_CASE("ingest counts a bad date as malformed") {
    testsupport::TempDir dir("ingest_bad");
    testsupport::write_file(dir / "c.jsonl",
                            "{\"id\":\"a\",\"date\":\"2000-01-01\",\"text\":\"alpha\"}\n"
                            "{\"id\":\"b\",\"date\":\"2000-13-01\",\"text\":\"beta\"}\n"
                            "{\"id\":\"c\",\"date\":\"2001-01-01\",\"text\":\"gamma\"}\n");
    const auto r = ingest(dir / "c.jsonl");
    CHECK(r.documents.size() == 2);
    CHECK(r.report.malformed == 1);
}

TEST_CASE("ingest skips broken json, missing fields and duplicate ids") {
    testsupport::TempDir dir("ingest_mixed");
    testsupport::write_file(dir / "c.jsonl",
                            "{\"id\":\"a\",\"date\":\"2000-01-01\",\"text\":\"alpha\"}\n"
                            "not json\n"
                            "\n"
                            "{\"id\":\"b\",\"date\":\"2000-01-01\"}\n"
                            "{\"id\":\"a\",\"date\":\"2002-01-01\",\"text\":\"again\"}\n");
    const auto r = ingest(dir / "c.jsonl");
    REQUIRE(r.documents.size() == 1);
    CHECK(r.documents[0].text == "alpha");
    CHECK(r.report.malformed == 2);
    CHECK(r.report.duplicates == 1);
}

TEST_CASE("ingest errors") {
    testsupport::TempDir dir("ingest_err");
    testsupport::write_file(dir / "empty.jsonl", "");
    CHECK_THROWS_AS(ingest(dir / "empty.jsonl"), ValidationError);
    CHECK_THROWS_AS(ingest(dir / "missing.jsonl"), IoError);
}

TEST_CASE("normalize examples") {
    CHECK(normalize("The children's genes.", default_stopwords()) == Tokens{"children", "genes"});
    const LemmaMap lemmas{{"children", "child"}, {"genes", "gene"}};
    CHECK(normalize("The children's genes.", default_stopwords(), &lemmas) == Tokens{"child", "gene"});
    CHECK(normalize("", default_stopwords()).empty());
    CHECK(normalize("X-ray 5HT2a a b", {}) == Tokens{"ray", "ht"});
}

TEST_CASE("normalize drops stopwords produced by the lemma map") {
    const TermSet stop{"be"};
    const LemmaMap lemmas{{"is", "be"}};
    CHECK(normalize("is it", stop, &lemmas) == Tokens{"it"});
}

TEST_CASE("normalize is idempotent") {
    Rng rng(3);
    const std::string alphabet = "abcdeFGH 12.,'-the THE of";
    for (int trial = 0; trial < 500; ++trial) {
        std::string text;
        const std::size_t n = rng() % 80;
        for (std::size_t i = 0; i < n; ++i) text.push_back(alphabet[rng() % alphabet.size()]);
        const auto once = normalize(text, default_stopwords());
        std::string joined;
        for (const auto& t : once) joined += t + " ";
        CHECK(normalize(joined, default_stopwords()) == once);
    }
}

TEST_CASE("stopword and lemma files") {
    testsupport::TempDir dir("lexicon");
    testsupport::write_file(dir / "stop.txt", "# comment\nfoo\r\nbar\n\n");
    const auto stop = load_stopwords(dir / "stop.txt");
    CHECK(stop == TermSet{"foo", "bar"});
    testsupport::write_file(dir / "lemma.tsv", "genes\tgene\nmice\tmouse\n");
    const auto lemmas = load_lemma_map(dir / "lemma.tsv");
    CHECK(lemmas.at("mice") == "mouse");
    testsupport::write_file(dir / "bad.tsv", "genes gene\n");
    CHECK_THROWS_AS(load_lemma_map(dir / "bad.tsv"), ValidationError);
    CHECK_THROWS_AS(load_stopwords(dir / "nope.txt"), IoError);
    CHECK(default_stopwords().contains("the"));
}

TEST_CASE("vocabulary examples") {
    auto v = build_vocabulary(docs_with_counts({{"a", 6}, {"b", 3}, {"c", 1}}), 0.9);
    CHECK(v.terms == Tokens{"a", "b"});
    CHECK(v.counts == std::vector<std::uint64_t>{6, 3});
    CHECK(v.find("b") == 1u);
    CHECK_FALSE(v.find("c").has_value());

    v = build_vocabulary(docs_with_counts({{"a", 6}, {"b", 3}, {"c", 1}}), 1.0);
    CHECK(v.size() == 3);

    v = build_vocabulary(docs_with_counts({{"a", 5}, {"b", 5}}), 0.5);
    CHECK(v.terms == Tokens{"a", "b"});

    CHECK_THROWS_AS(build_vocabulary({{}}, 0.9), ValidationError);
    CHECK_THROWS_AS(build_vocabulary(docs_with_counts({{"a", 1}}), 0.0), ValidationError);
    CHECK_THROWS_AS(build_vocabulary(docs_with_counts({{"a", 1}}), 1.5), ValidationError);
}

TEST_CASE("vocabulary cutoff is minimal and deterministic") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::map<std::string, int> counts;
        const int n_terms = 1 + static_cast<int>(rng() % 30);
        for (int t = 0; t < n_terms; ++t) counts["t" + std::to_string(t)] = 1 + static_cast<int>(rng() % 20);
        const double fraction = 0.05 + 0.95 * uniform01(rng);
        const auto docs = docs_with_counts(counts);
        const auto v = build_vocabulary(docs, fraction);
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0,
                                             [](double s, const auto& kv) { return s + kv.second; });
        const double kept = std::accumulate(v.counts.begin(), v.counts.end(), 0.0);
        CHECK(kept >= fraction * total * (1 - 1e-12));
        // removing the whole last tie group drops below the target
        std::size_t group = 0;
        while (group < v.size() && v.counts[v.size() - 1 - group] == v.counts.back()) ++group;
        double without = kept - static_cast<double>(group) * static_cast<double>(v.counts.back());
        CHECK(without < fraction * total);
        CHECK(std::is_sorted(v.counts.rbegin(), v.counts.rend()));
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(v.find(v.terms[i]) == i);
        CHECK(build_vocabulary(docs, fraction).terms == v.terms);
    }
}

TEST_CASE("encode drops unknown tokens and empty documents") {
    const std::vector<RawDocument> raw{{"a", Date{year{2000}, January, day{1}}, ""},
                                       {"b", Date{year{2000}, January, day{1}}, ""}};
    const std::vector<Tokens> tokens{{"x", "zz", "y"}, {"zz"}};
    Vocabulary vocab;
    vocab.terms = {"x", "y"};
    vocab.counts = {1, 1};
    reindex(vocab);
    IngestReport report;
    const auto docs = encode(raw, tokens, vocab, report);
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].tokens == std::vector<std::uint32_t>{0, 1});
    CHECK(report.dropped_empty == 1);
}

TEST_CASE("slicing the 1946 corpus into 10 year windows with 5 year overlap") {
    std::vector<EncodedDocument> docs{doc_on("kanner", 1946, 3, 1), doc_on("late", 2015, 12, 31),
                                      doc_on("mid", 1953, 7, 1)};
    const auto epochs = slice_epochs(docs, {10, 5, std::nullopt});
    REQUIRE(epochs.size() >= 3);
    CHECK(epochs[0].start == Date{year{1946}, January, day{1}});
    CHECK(epochs[1].start == Date{year{1951}, January, day{1}});
    CHECK(epochs[2].start == Date{year{1956}, January, day{1}});
    CHECK(epochs[0].end == Date{year{1956}, January, day{1}});
    CHECK(epochs.back().start == Date{year{2011}, January, day{1}});
    // "mid" (1953) sits in the 1946 and 1951 windows
    int seen = 0;
    for (const auto& e : epochs)
        if (std::find(e.doc_indices.begin(), e.doc_indices.end(), 2u) != e.doc_indices.end()) ++seen;
    CHECK(seen == 2);
}

TEST_CASE("disjoint windows and the single document case") {
    std::vector<EncodedDocument> docs{doc_on("a", 2000, 1, 1), doc_on("b", 2009, 12, 31)};
    const auto epochs = slice_epochs(docs, {5, 0, std::nullopt});
    REQUIRE(epochs.size() == 2);
    CHECK(epochs[0].end == epochs[1].start);
    CHECK(epochs[0].doc_indices == std::vector<std::size_t>{0});
    CHECK(epochs[1].doc_indices == std::vector<std::size_t>{1});

    const auto single = slice_epochs({doc_on("x", 1999, 5, 5)}, {5, 0, std::nullopt});
    REQUIRE(single.size() == 1);
    CHECK(single[0].doc_indices.size() == 1);
}

TEST_CASE("epoch spec validation") {
    CHECK_THROWS_AS(EpochSpec({0, 0, std::nullopt}).validate(), ValidationError);
    CHECK_THROWS_AS(EpochSpec({5, 5, std::nullopt}).validate(), ValidationError);
    CHECK_THROWS_AS(EpochSpec({5, -1, std::nullopt}).validate(), ValidationError);
    const std::vector<EncodedDocument> docs{doc_on("a", 1990, 1, 1)};
    CHECK_THROWS_AS(slice_epochs(docs, {5, 0, Date{year{1995}, January, day{1}}}), ValidationError);
}

TEST_CASE("every document lands in between 1 and ceil(length/step) windows") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const int length = 1 + static_cast<int>(rng() % 10);
        const int overlap = static_cast<int>(rng() % static_cast<unsigned>(length));
        std::vector<EncodedDocument> docs;
        const int n = 1 + static_cast<int>(rng() % 40);
        for (int j = 0; j < n; ++j)
            docs.push_back(doc_on(std::to_string(j), 1950 + static_cast<int>(rng() % 60),
                                  1 + static_cast<unsigned>(rng() % 12), 1 + static_cast<unsigned>(rng() % 28)));
        const auto epochs = slice_epochs(docs, {length, overlap, std::nullopt});
        const int step = length - overlap;
        const int max_windows = (length + step - 1) / step;
        for (std::size_t j = 0; j < docs.size(); ++j) {
            int seen = 0;
            for (const auto& e : epochs) {
                const bool listed = std::find(e.doc_indices.begin(), e.doc_indices.end(), j) != e.doc_indices.end();
                CHECK(listed == e.contains(docs[j].timestamp));
                seen += listed ? 1 : 0;
            }
            CHECK(seen >= 1);
            CHECK(seen <= max_windows);
        }
        for (std::size_t t = 1; t < epochs.size(); ++t)
            CHECK(sys_days{epochs[t].start} == sys_days{epochs[t - 1].start + years{step}});
    }
}
