#include "topictrace/io.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "topictrace/errors.hpp"

namespace topictrace::io {

namespace {

constexpr char kCorpusMagic[8] = {'T', 'T', 'C', 'O', 'R', 'P', 'U', 'S'};
constexpr std::uint32_t kCorpusVersion = 1;

class Writer {
public:
    explicit Writer(std::string& out) : out_(out) {}
    template <class T>
    void put(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i)
            out_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
    }
    void str(std::string_view s) {
        put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
        out_.append(s);
    }

private:
    std::string& out_;
};

class Reader {
public:
    Reader(std::string_view data, const fs::path& path) : data_(data), path_(path) {}
    template <class T>
    T get() {
        need(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }
    std::string str() {
        const auto n = get<std::uint32_t>();
        need(n);
        std::string s(data_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    std::string_view raw(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw ValidationError("truncated corpus file: " + path_.string());
    }
    std::string_view data_;
    const fs::path& path_;
    std::size_t pos_ = 0;
};

std::string fmt_double(double v) {
    // shortest round-trip form, same as the JSON writer
    return json(v).dump();
}

std::string topic_ref(TopicId id) { return std::to_string(id.epoch) + ":" + std::to_string(id.k); }

TopicId parse_topic_ref(const std::string& s) {
    auto colon = s.find(':');
    if (colon == std::string::npos) throw ValidationError("bad topic reference: " + s);
    return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// Data lines of a provenance-headed CSV, header checked and stripped.
std::vector<std::string> csv_rows(const fs::path& path, std::string_view header) {
    std::istringstream in(read_text(path));
    std::vector<std::string> rows;
    std::string line;
    bool seen_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!seen_header) {
            if (line != header) throw ValidationError(path.string() + ": expected header '" + std::string(header) + "'");
            seen_header = true;
            continue;
        }
        rows.push_back(line);
    }
    if (!seen_header) throw ValidationError(path.string() + ": missing CSV header");
    return rows;
}

}  // namespace

void write_text(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("error while writing " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& path) {
    json j = json::parse(read_text(path), nullptr, false);
    if (j.is_discarded()) throw ValidationError("malformed JSON in " + path.string());
    return j;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(1) + "\n"); }

std::string provenance_line(const json& config) { return "# config: " + config.dump() + "\n"; }

void write_corpus_bin(const fs::path& path, const EncodedCorpus& corpus, const json& config) {
    std::string buf(kCorpusMagic, sizeof kCorpusMagic);
    Writer w(buf);
    w.put<std::uint32_t>(kCorpusVersion);
    w.str(config.dump());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(corpus.vocab.size()));
    for (std::size_t i = 0; i < corpus.vocab.size(); ++i) {
        w.str(corpus.vocab.terms[i]);
        w.put<std::uint64_t>(corpus.vocab.counts[i]);
    }
    w.put<std::uint64_t>(corpus.documents.size());
    for (const auto& d : corpus.documents) {
        w.str(d.id);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(static_cast<int>(d.timestamp.year())));
        w.put<std::uint8_t>(static_cast<std::uint8_t>(static_cast<unsigned>(d.timestamp.month())));
        w.put<std::uint8_t>(static_cast<std::uint8_t>(static_cast<unsigned>(d.timestamp.day())));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(d.tokens.size()));
        for (auto t : d.tokens) w.put<std::uint32_t>(t);
    }
    write_text(path, buf);
}

EncodedCorpus read_corpus_bin(const fs::path& path) {
    const std::string data = read_text(path);
    Reader r(data, path);
    if (r.raw(sizeof kCorpusMagic) != std::string_view(kCorpusMagic, sizeof kCorpusMagic))
        throw ValidationError("not an encoded corpus file: " + path.string());
    if (r.get<std::uint32_t>() != kCorpusVersion)
        throw ValidationError("unsupported corpus file version: " + path.string());
    r.str();  // provenance
    EncodedCorpus corpus;
    const auto n_terms = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_terms; ++i) {
        corpus.vocab.terms.push_back(r.str());
        corpus.vocab.counts.push_back(r.get<std::uint64_t>());
    }
    reindex(corpus.vocab);
    const auto n_docs = r.get<std::uint64_t>();
    for (std::uint64_t j = 0; j < n_docs; ++j) {
        EncodedDocument d;
        d.id = r.str();
        const auto y = static_cast<std::int32_t>(r.get<std::uint32_t>());
        const auto m = r.get<std::uint8_t>();
        const auto day = r.get<std::uint8_t>();
        d.timestamp = Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{day}};
        const auto n = r.get<std::uint32_t>();
        d.tokens.resize(n);
        for (auto& t : d.tokens) {
            t = r.get<std::uint32_t>();
            if (t >= n_terms) throw ValidationError("token id outside vocabulary in " + path.string());
        }
        corpus.documents.push_back(std::move(d));
    }
    if (!r.done()) throw ValidationError("trailing bytes in corpus file: " + path.string());
    return corpus;
}

std::string vocab_csv(const Vocabulary& vocab, const json& config) {
    std::string out = provenance_line(config) + "id,term,count\n";
    for (std::size_t i = 0; i < vocab.size(); ++i)
        out += std::to_string(i) + "," + vocab.terms[i] + "," + std::to_string(vocab.counts[i]) + "\n";
    return out;
}

Vocabulary read_vocab_csv(const fs::path& path) {
    Vocabulary v;
    for (const auto& row : csv_rows(path, "id,term,count")) {
        auto cells = split(row, ',');
        if (cells.size() != 3 || std::stoul(cells[0]) != v.terms.size())
            throw ValidationError(path.string() + ": bad vocabulary row '" + row + "'");
        v.terms.push_back(cells[1]);
        v.counts.push_back(std::stoull(cells[2]));
    }
    reindex(v);
    return v;
}

json model_to_json(const EpochModel& model, std::size_t vocab_size, const json& config) {
    json topics = json::array();
    for (const auto& t : model.topics) {
        json phi = json::array();
        for (std::size_t w = 0; w < t.phi.size(); ++w)
            if (t.phi[w] >= kPhiElisionThreshold) phi.push_back({w, t.phi[w]});
        topics.push_back({{"k", t.id.k}, {"popularity", t.popularity}, {"phi", std::move(phi)}});
    }
    return json{{"config", config},
                {"epoch", model.epoch.index},
                {"window", {format_date(model.epoch.start), format_date(model.epoch.end)}},
                {"n_docs", model.num_documents},
                {"vocab_size", vocab_size},
                {"phi_elision_threshold", kPhiElisionThreshold},
                {"K", model.topics.size()},
                {"topics", std::move(topics)},
                {"loglik_trace", model.loglik_trace}};
}

EpochModel model_from_json(const json& j) {
    try {
        EpochModel m;
        m.epoch.index = j.at("epoch").get<int>();
        const auto& window = j.at("window");
        auto start = parse_date(window.at(0).get<std::string>());
        auto end = parse_date(window.at(1).get<std::string>());
        if (!start || !end) throw ValidationError("bad epoch window in model file");
        m.epoch.start = *start;
        m.epoch.end = *end;
        m.num_documents = j.at("n_docs").get<std::size_t>();
        const auto vocab_size = j.at("vocab_size").get<std::size_t>();
        for (const auto& jt : j.at("topics")) {
            Topic t;
            t.id = {m.epoch.index, jt.at("k").get<int>()};
            t.popularity = jt.at("popularity").get<double>();
            t.phi.assign(vocab_size, 0.0);
            std::vector<bool> present(vocab_size, false);
            double kept = 0.0;
            std::size_t n_kept = 0;
            for (const auto& pair : jt.at("phi")) {
                const auto w = pair.at(0).get<std::size_t>();
                if (w >= vocab_size || present[w]) throw ValidationError("bad phi entry in model file");
                t.phi[w] = pair.at(1).get<double>();
                present[w] = true;
                kept += t.phi[w];
                ++n_kept;
            }
            if (n_kept < vocab_size) {
                const double fill = std::max(0.0, 1.0 - kept) / static_cast<double>(vocab_size - n_kept);
                for (std::size_t w = 0; w < vocab_size; ++w)
                    if (!present[w]) t.phi[w] = fill;
            }
            m.topics.push_back(std::move(t));
        }
        if (m.topics.size() != j.at("K").get<std::size_t>()) throw ValidationError("topic count mismatch in model file");
        m.loglik_trace = j.at("loglik_trace").get<std::vector<double>>();
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model file: ") + e.what());
    }
}

std::string model_file_name(int epoch_index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "epoch_%03d.json", epoch_index);
    return buf;
}

std::vector<EpochModel> read_models(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("model directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.starts_with("epoch_") && name.ends_with(".json")) files.push_back(entry.path());
    }
    std::vector<EpochModel> models;
    for (const auto& f : files) models.push_back(model_from_json(read_json(f)));
    std::sort(models.begin(), models.end(),
              [](const EpochModel& a, const EpochModel& b) { return a.epoch.index < b.epoch.index; });
    return models;
}

json graph_to_json(const TemporalGraph& g, const json& config) {
    json nodes = json::array();
    for (const auto& n : g.nodes())
        nodes.push_back({{"epoch", n.id.epoch}, {"k", n.id.k}, {"popularity", n.popularity}});
    json edges = json::array();
    for (const auto& e : g.edges()) {
        const auto& a = g.nodes()[e.from].id;
        const auto& b = g.nodes()[e.to].id;
        edges.push_back({{"from", {a.epoch, a.k}}, {"to", {b.epoch, b.k}}, {"w", e.weight}});
    }
    return json{{"config", config},
                {"measure", std::string(to_string(g.measure))},
                {"zeta", g.zeta},
                {"pruned", g.pruned},
                {"cdf_scope", std::string(to_string(g.scope))},
                {"thresholds", g.thresholds},
                {"candidate_edges", g.candidate_edges},
                {"nodes", std::move(nodes)},
                {"edges", std::move(edges)}};
}

TemporalGraph graph_from_json(const json& j) {
    try {
        std::vector<GraphNode> nodes;
        for (const auto& n : j.at("nodes"))
            nodes.push_back({{n.at("epoch").get<int>(), n.at("k").get<int>()}, 0, n.at("popularity").get<double>()});
        std::vector<int> epochs;
        for (const auto& n : nodes) epochs.push_back(n.id.epoch);
        std::sort(epochs.begin(), epochs.end());
        epochs.erase(std::unique(epochs.begin(), epochs.end()), epochs.end());
        std::map<TopicId, std::size_t> index;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            nodes[i].layer = static_cast<std::size_t>(
                std::lower_bound(epochs.begin(), epochs.end(), nodes[i].id.epoch) - epochs.begin());
            index[nodes[i].id] = i;
        }
        auto lookup = [&](const json& ref) {
            auto it = index.find({ref.at(0).get<int>(), ref.at(1).get<int>()});
            if (it == index.end()) throw ValidationError("graph edge references unknown node");
            return it->second;
        };
        std::vector<GraphEdge> edges;
        for (const auto& e : j.at("edges"))
            edges.push_back({lookup(e.at("from")), lookup(e.at("to")), e.at("w").get<double>()});
        TemporalGraph g(std::move(nodes), std::move(edges));
        auto measure = parse_measure(j.at("measure").get<std::string>());
        auto scope = parse_cdf_scope(j.at("cdf_scope").get<std::string>());
        if (!measure || !scope) throw ValidationError("unknown measure or CDF scope in graph file");
        g.measure = *measure;
        g.scope = *scope;
        g.zeta = j.at("zeta").get<double>();
        g.pruned = j.at("pruned").get<bool>();
        g.thresholds = j.at("thresholds").get<std::vector<double>>();
        g.candidate_edges = j.at("candidate_edges").get<std::size_t>();
        return g;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed graph file: ") + e.what());
    }
}

std::string events_csv(std::span<const TopicEvent> events, const json& config) {
    std::string out = provenance_line(config) + "epoch,kind,topic,partners\n";
    for (const auto& ev : events) {
        std::string partners;
        for (const auto& p : ev.partners) {
            if (!partners.empty()) partners.push_back(';');
            partners += topic_ref(p);
        }
        out += std::to_string(ev.node.epoch) + "," + std::string(to_string(ev.kind)) + "," +
               std::to_string(ev.node.k) + "," + partners + "\n";
    }
    return out;
}

std::vector<TopicEvent> read_events_csv(const fs::path& path) {
    std::vector<TopicEvent> events;
    for (const auto& row : csv_rows(path, "epoch,kind,topic,partners")) {
        auto cells = split(row, ',');
        if (cells.size() != 4) throw ValidationError(path.string() + ": bad event row '" + row + "'");
        auto kind = parse_event_kind(cells[1]);
        if (!kind) throw ValidationError(path.string() + ": unknown event kind '" + cells[1] + "'");
        TopicEvent ev{{std::stoi(cells[0]), std::stoi(cells[2])}, *kind, {}};
        if (!cells[3].empty())
            for (const auto& ref : split(cells[3], ';')) ev.partners.push_back(parse_topic_ref(ref));
        events.push_back(std::move(ev));
    }
    return events;
}

std::string rates_csv(std::span<const EventRates> rates, const json& config) {
    std::string out = provenance_line(config) + "epoch,K,births,deaths,merges,splits\n";
    for (const auto& r : rates)
        out += std::to_string(r.epoch) + "," + std::to_string(r.num_topics) + "," + fmt_double(r.births) +
               "," + fmt_double(r.deaths) + "," + fmt_double(r.merges) + "," + fmt_double(r.splits) + "\n";
    return out;
}

std::string cdf_csv(const EmpiricalCDF& cdf, const json& config) {
    std::string out = provenance_line(config) + "value,cdf\n";
    for (double v : cdf.sorted_values()) out += fmt_double(v) + "," + fmt_double(cdf(v)) + "\n";
    return out;
}

std::string lifespans_csv(std::span<const LifespanRecord> records, const json& config) {
    std::string out = provenance_line(config) +
                      "rule,creation,topic,death,lifespan,terminal_cause,censored,chain\n";
    for (const auto& r : records) {
        std::string chain;
        for (const auto& id : r.chain) {
            if (!chain.empty()) chain.push_back(';');
            chain += topic_ref(id);
        }
        out += std::string(to_string(r.rule)) + "," + std::to_string(r.creation) + "," +
               std::to_string(r.chain.front().k) + "," + std::to_string(r.death) + "," +
               std::to_string(r.lifespan) + "," + std::string(to_string(r.terminal_cause)) + "," +
               (r.censored ? "1" : "0") + "," + chain + "\n";
    }
    return out;
}

}  // namespace topictrace::io
