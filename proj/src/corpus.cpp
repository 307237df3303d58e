#include "topictrace/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "topictrace/errors.hpp"

namespace topictrace {

namespace detail {
extern const char kDefaultStopwords[];
}

namespace {

using json = nlohmann::json;
using namespace std::chrono;

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

TermSet parse_term_lines(std::istream& in) {
    TermSet out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        out.insert(line);
    }
    return out;
}

Date add_years(const Date& d, int n) {
    Date r = d + years{n};
    if (!r.ok()) r = r.year() / r.month() / last;
    return r;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
        !parse_int(text.substr(8, 2), d))
        return std::nullopt;
    Date date{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!date.ok()) return std::nullopt;
    return date;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

IngestResult ingest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read corpus file: " + path.string());

    IngestResult result;
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++result.report.lines;
        json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (!record.is_object()) {
            ++result.report.malformed;
            continue;
        }
        auto id = record.find("id");
        auto date = record.find("date");
        auto text = record.find("text");
        if (id == record.end() || date == record.end() || text == record.end() ||
            !id->is_string() || !date->is_string() || !text->is_string() ||
            id->get_ref<const std::string&>().empty()) {
            ++result.report.malformed;
            continue;
        }
        auto parsed = parse_date(date->get_ref<const std::string&>());
        if (!parsed) {
            ++result.report.malformed;
            continue;
        }
        if (!seen.insert(id->get<std::string>()).second) {
            ++result.report.duplicates;
            continue;
        }
        result.documents.push_back({id->get<std::string>(), *parsed, text->get<std::string>()});
    }
    if (in.bad()) throw IoError("error while reading corpus file: " + path.string());
    if (result.documents.empty())
        throw ValidationError("empty corpus: no parseable records in " + path.string());
    return result;
}

const TermSet& default_stopwords() {
    static const TermSet words = [] {
        std::istringstream in(detail::kDefaultStopwords);
        return parse_term_lines(in);
    }();
    return words;
}

TermSet load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read stopword file: " + path.string());
    return parse_term_lines(in);
}

LemmaMap load_lemma_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read lemma map: " + path.string());
    LemmaMap out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
            throw ValidationError("lemma map " + path.string() + ":" + std::to_string(lineno) +
                                  ": expected term<TAB>lemma");
        out[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return out;
}

std::vector<std::string> normalize(std::string_view text, const TermSet& stopwords,
                                   const LemmaMap* lemma_map) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 2 && !stopwords.contains(current)) {
            if (lemma_map) {
                if (auto it = lemma_map->find(current); it != lemma_map->end()) current = it->second;
            }
            if (!current.empty() && !stopwords.contains(current)) out.push_back(current);
        }
        current.clear();
    };
    for (char c : text) {
        if (c >= 'A' && c <= 'Z')
            current.push_back(static_cast<char>(c - 'A' + 'a'));
        else if (c >= 'a' && c <= 'z')
            current.push_back(c);
        else
            flush();
    }
    flush();
    return out;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view term) const {
    auto it = index.find(std::string(term));
    if (it == index.end()) return std::nullopt;
    return it->second;
}

void reindex(Vocabulary& vocab) {
    vocab.index.clear();
    for (std::uint32_t i = 0; i < vocab.terms.size(); ++i) vocab.index.emplace(vocab.terms[i], i);
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs,
                            double energy_fraction) {
    if (!(energy_fraction > 0.0 && energy_fraction <= 1.0))
        throw ValidationError("energy fraction must lie in (0, 1]");

    std::unordered_map<std::string, std::uint64_t> counts;
    std::uint64_t total = 0;
    for (const auto& doc : docs) {
        for (const auto& t : doc) ++counts[t];
        total += doc.size();
    }
    if (total == 0) throw ValidationError("cannot build a vocabulary from an empty token stream");

    std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    // relative slack absorbs rounding in energy_fraction * total
    const double target = energy_fraction * static_cast<double>(total) * (1.0 - 1e-12);
    std::size_t keep = 0;
    std::uint64_t cumulative = 0;
    while (keep < ranked.size() && static_cast<double>(cumulative) < target)
        cumulative += ranked[keep++].second;
    while (keep < ranked.size() && ranked[keep].second == ranked[keep - 1].second) ++keep;

    Vocabulary vocab;
    vocab.energy_fraction = energy_fraction;
    vocab.terms.reserve(keep);
    vocab.counts.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        vocab.terms.push_back(std::move(ranked[i].first));
        vocab.counts.push_back(ranked[i].second);
    }
    reindex(vocab);
    return vocab;
}

std::vector<EncodedDocument> encode(const std::vector<RawDocument>& raw,
                                    const std::vector<std::vector<std::string>>& normalized,
                                    const Vocabulary& vocab, IngestReport& report) {
    if (raw.size() != normalized.size())
        throw ValidationError("encode: document and token list counts differ");
    std::vector<EncodedDocument> out;
    out.reserve(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) {
        EncodedDocument doc{raw[j].id, raw[j].timestamp, {}};
        for (const auto& t : normalized[j])
            if (auto id = vocab.find(t)) doc.tokens.push_back(*id);
        if (doc.tokens.empty()) {
            ++report.dropped_empty;
            continue;
        }
        out.push_back(std::move(doc));
    }
    return out;
}

void EpochSpec::validate() const {
    if (epoch_length < 1) throw ValidationError("epoch length must be at least one year");
    if (overlap < 0 || overlap >= epoch_length)
        throw ValidationError("epoch overlap must satisfy 0 <= overlap < epoch length");
    if (origin && !origin->ok()) throw ValidationError("invalid epoch origin date");
}

std::vector<Epoch> slice_epochs(const std::vector<EncodedDocument>& docs, const EpochSpec& spec) {
    spec.validate();
    if (docs.empty()) return {};

    auto by_day = [](const EncodedDocument& a, const EncodedDocument& b) {
        return sys_days{a.timestamp} < sys_days{b.timestamp};
    };
    const Date first = std::min_element(docs.begin(), docs.end(), by_day)->timestamp;
    const Date last_doc = std::max_element(docs.begin(), docs.end(), by_day)->timestamp;
    const Date origin = spec.origin ? *spec.origin : Date{first.year() / January / 1};
    if (sys_days{first} < sys_days{origin})
        throw ValidationError("document dated " + format_date(first) +
                              " precedes the epoch origin " + format_date(origin));

    std::vector<Epoch> epochs;
    for (int i = 0;; ++i) {
        Date start = add_years(origin, i * spec.step());
        if (sys_days{start} > sys_days{last_doc}) break;
        epochs.push_back({i, start, add_years(start, spec.epoch_length), {}});
    }
    for (std::size_t j = 0; j < docs.size(); ++j) {
        for (auto& e : epochs)
            if (e.contains(docs[j].timestamp)) e.doc_indices.push_back(j);
    }
    return epochs;
}

}  // namespace topictrace
