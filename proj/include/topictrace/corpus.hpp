#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace topictrace {

using Date = std::chrono::year_month_day;

// Strict "YYYY-MM-DD"; nullopt on anything else or on an impossible date.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& date);

struct RawDocument {
    std::string id;
    Date timestamp;
    std::string text;
};

struct IngestReport {
    std::size_t lines = 0;
    std::size_t malformed = 0;
    std::size_t duplicates = 0;
    std::size_t dropped_empty = 0;  // filled in by encode()
};

struct IngestResult {
    std::vector<RawDocument> documents;
    IngestReport report;
};

// Reads JSON Lines records {"id", "date", "text"}. Bad lines are counted and
// skipped; duplicate ids keep the first occurrence.
// Throws IoError if the file cannot be read, ValidationError if nothing parses.
IngestResult ingest(const std::filesystem::path& path);

using TermSet = std::unordered_set<std::string>;
using LemmaMap = std::unordered_map<std::string, std::string>;

const TermSet& default_stopwords();
TermSet load_stopwords(const std::filesystem::path& path);
LemmaMap load_lemma_map(const std::filesystem::path& path);

// Lowercased runs of ASCII letters of length >= 2, lemmatized when a map is
// given, with stopwords removed (before and after lemmatization).
std::vector<std::string> normalize(std::string_view text, const TermSet& stopwords,
                                   const LemmaMap* lemma_map = nullptr);

struct Vocabulary {
    std::vector<std::string> terms;  // descending count, then ascending term
    std::vector<std::uint64_t> counts;
    std::unordered_map<std::string, std::uint32_t> index;
    double energy_fraction = 1.0;

    std::size_t size() const { return terms.size(); }
    std::optional<std::uint32_t> find(std::string_view term) const;
};

// Smallest frequency-ranked prefix whose token mass reaches
// energy_fraction of the total; every term tied with the last retained count
// is kept as well.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs,
                            double energy_fraction);

// Rebuilds the lookup index after terms/counts were filled in directly.
void reindex(Vocabulary& vocab);

struct EncodedDocument {
    std::string id;
    Date timestamp;
    std::vector<std::uint32_t> tokens;
};

struct EncodedCorpus {
    Vocabulary vocab;
    std::vector<EncodedDocument> documents;
};

// Out-of-vocabulary tokens are dropped, then documents left empty are dropped
// and counted in report.dropped_empty.
std::vector<EncodedDocument> encode(const std::vector<RawDocument>& raw,
                                    const std::vector<std::vector<std::string>>& normalized,
                                    const Vocabulary& vocab, IngestReport& report);

struct EpochSpec {
    int epoch_length = 5;  // years
    int overlap = 0;       // years
    std::optional<Date> origin;  // defaults to Jan 1 of the earliest document's year

    int step() const { return epoch_length - overlap; }
    void validate() const;
};

struct Epoch {
    int index = 0;
    Date start;  // inclusive
    Date end;    // exclusive
    std::vector<std::size_t> doc_indices;  // into the sliced document list

    bool contains(const Date& d) const {
        return std::chrono::sys_days{d} >= std::chrono::sys_days{start} &&
               std::chrono::sys_days{d} < std::chrono::sys_days{end};
    }
};

// Windows start at the origin and advance by the step until a window starts
// after the last document. Throws ValidationError for an invalid spec or a
// document that precedes the origin.
std::vector<Epoch> slice_epochs(const std::vector<EncodedDocument>& docs, const EpochSpec& spec);

}  // namespace topictrace
