#include "topictrace/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "topictrace/errors.hpp"
#include "topictrace/random.hpp"
#include "topictrace/similarity.hpp"

namespace topictrace {

namespace {

using json = nlohmann::json;
using namespace std::chrono;

std::string_view to_string(DirectiveKind k) {
    switch (k) {
        case DirectiveKind::Birth: return "birth";
        case DirectiveKind::Kill: return "kill";
        case DirectiveKind::Split: return "split";
        case DirectiveKind::Merge: return "merge";
        case DirectiveKind::Drift: return "drift";
    }
    return "unknown";
}

DirectiveKind parse_directive(const std::string& s) {
    for (auto k : {DirectiveKind::Birth, DirectiveKind::Kill, DirectiveKind::Split,
                   DirectiveKind::Merge, DirectiveKind::Drift})
        if (to_string(k) == s) return k;
    throw ValidationError("unknown scenario directive: " + s);
}

bool pre_phase(DirectiveKind k) {
    return k == DirectiveKind::Birth || k == DirectiveKind::Merge || k == DirectiveKind::Drift;
}

std::size_t expected_topics(DirectiveKind k) {
    switch (k) {
        case DirectiveKind::Birth: return 0;
        case DirectiveKind::Merge: return 2;
        default: return 1;
    }
}

// Directives of one epoch and phase, in script order.
std::vector<const Directive*> directives_at(const Scenario& s, int epoch, bool pre) {
    std::vector<const Directive*> out;
    for (const auto& d : s.script)
        if (d.epoch == epoch && pre_phase(d.kind) == pre) out.push_back(&d);
    return out;
}

std::vector<double> perturb(Rng& rng, const std::vector<double>& phi, double magnitude) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out(phi.size());
    double total = 0.0;
    for (std::size_t w = 0; w < phi.size(); ++w) {
        out[w] = phi[w] * std::exp(magnitude * normal(rng));
        total += out[w];
    }
    for (double& v : out) v /= total;
    return out;
}

Date mid_window(int start_year, int epoch_years, int epoch) {
    const sys_days start{year{start_year + epoch * epoch_years} / January / 1};
    const sys_days end{year{start_year + (epoch + 1) * epoch_years} / January / 1};
    return Date{start + (end - start) / 2};
}

}  // namespace

void Scenario::validate() const {
    if (n_epochs < 1 || vocab_size < 2 || docs_per_epoch < 1 || tokens_per_doc < 1 ||
        initial_topics < 1 || epoch_years < 1)
        throw ValidationError("scenario sizes must be positive (vocab_size >= 2)");
    if (!(topic_concentration > 0.0) || !(doc_concentration > 0.0))
        throw ValidationError("scenario concentrations must be positive");
    for (const auto& d : script) {
        if (d.epoch < 0 || d.epoch >= n_epochs)
            throw ValidationError("directive epoch " + std::to_string(d.epoch) + " out of range");
        if (d.topics.size() != expected_topics(d.kind))
            throw ValidationError(std::string(to_string(d.kind)) + " directive at epoch " +
                                  std::to_string(d.epoch) + " takes " +
                                  std::to_string(expected_topics(d.kind)) + " topic(s)");
        if ((d.kind == DirectiveKind::Birth || d.kind == DirectiveKind::Merge) && d.epoch == 0)
            throw ValidationError(std::string(to_string(d.kind)) + " cannot happen in the first epoch");
        if ((d.kind == DirectiveKind::Kill || d.kind == DirectiveKind::Split) && d.epoch == n_epochs - 1)
            throw ValidationError(std::string(to_string(d.kind)) + " cannot happen in the last epoch");
        if (d.kind == DirectiveKind::Merge && d.topics[0] == d.topics[1])
            throw ValidationError("merge needs two distinct topics");
    }
    // replay the script on topic ids only
    std::set<int> live;
    int next_id = initial_topics;
    for (int i = 0; i < initial_topics; ++i) live.insert(i);
    auto require_live = [&](const Directive& d, int t) {
        if (!live.contains(t))
            throw ValidationError(std::string(to_string(d.kind)) + " at epoch " +
                                  std::to_string(d.epoch) + " references topic " + std::to_string(t) +
                                  ", which is not live");
    };
    for (int e = 0; e < n_epochs; ++e) {
        for (const auto* d : directives_at(*this, e, true)) {
            for (int t : d->topics) require_live(*d, t);
            if (d->kind == DirectiveKind::Merge) {
                live.erase(d->topics[0]);
                live.erase(d->topics[1]);
                live.insert(next_id++);
            } else if (d->kind == DirectiveKind::Birth) {
                live.insert(next_id++);
            }
        }
        if (live.empty())
            throw ValidationError("scenario leaves epoch " + std::to_string(e) + " without live topics");
        for (const auto* d : directives_at(*this, e, false)) {
            for (int t : d->topics) require_live(*d, t);
            live.erase(d->topics[0]);
            if (d->kind == DirectiveKind::Split) {
                live.insert(next_id++);
                live.insert(next_id++);
            }
        }
        if (live.empty() && e + 1 < n_epochs)
            throw ValidationError("scenario leaves epoch " + std::to_string(e + 1) +
                                  " without live topics");
    }
}

Scenario scenario_from_json(const json& j) {
    try {
        Scenario s;
        s.n_epochs = j.at("n_epochs").get<int>();
        s.vocab_size = j.at("vocab_size").get<int>();
        s.docs_per_epoch = j.at("docs_per_epoch").get<int>();
        s.tokens_per_doc = j.at("tokens_per_doc").get<int>();
        s.initial_topics = j.value("initial_topics", 1);
        s.seed = j.value("seed", std::uint64_t{1});
        s.start_year = j.value("start_year", 2000);
        s.epoch_years = j.value("epoch_years", 1);
        s.topic_concentration = j.value("topic_concentration", 0.1);
        s.doc_concentration = j.value("doc_concentration", 0.5);
        s.split_noise = j.value("split_noise", 1.0);
        s.drift_noise = j.value("drift_noise", 0.5);
        for (const auto& d : j.value("script", json::array())) {
            Directive dir;
            dir.epoch = d.at("epoch").get<int>();
            dir.kind = parse_directive(d.at("op").get<std::string>());
            if (d.contains("topic")) dir.topics.push_back(d.at("topic").get<int>());
            if (d.contains("topics")) dir.topics = d.at("topics").get<std::vector<int>>();
            dir.magnitude = d.value("magnitude", 0.0);
            s.script.push_back(std::move(dir));
        }
        return s;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed scenario: ") + e.what());
    }
}

json to_json(const Scenario& s) {
    json script = json::array();
    for (const auto& d : s.script) {
        json jd{{"epoch", d.epoch}, {"op", std::string(to_string(d.kind))}};
        if (d.topics.size() == 1) jd["topic"] = d.topics[0];
        if (d.topics.size() > 1) jd["topics"] = d.topics;
        if (d.magnitude != 0.0) jd["magnitude"] = d.magnitude;
        script.push_back(std::move(jd));
    }
    return json{{"n_epochs", s.n_epochs},
                {"vocab_size", s.vocab_size},
                {"docs_per_epoch", s.docs_per_epoch},
                {"tokens_per_doc", s.tokens_per_doc},
                {"initial_topics", s.initial_topics},
                {"seed", s.seed},
                {"start_year", s.start_year},
                {"epoch_years", s.epoch_years},
                {"topic_concentration", s.topic_concentration},
                {"doc_concentration", s.doc_concentration},
                {"split_noise", s.split_noise},
                {"drift_noise", s.drift_noise},
                {"script", std::move(script)}};
}

std::string synthetic_term(int id) {
    std::string s(4, 'a');
    for (int i = 3; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = static_cast<char>('a' + id % 26);
        id /= 26;
    }
    return "q" + s;
}

SyntheticCorpus generate(const Scenario& sc) {
    sc.validate();
    Rng rng(sc.seed);
    const auto V = static_cast<std::size_t>(sc.vocab_size);

    SyntheticCorpus out;
    auto& truth = out.truth;
    truth.start_year = sc.start_year;
    truth.epoch_years = sc.epoch_years;
    for (int w = 0; w < sc.vocab_size; ++w) truth.vocab.push_back(synthetic_term(w));

    std::map<int, std::vector<double>> phi;
    std::vector<int> live;
    int next_id = 0;
    auto new_topic = [&](std::vector<double> dist) {
        phi[next_id] = std::move(dist);
        live.push_back(next_id);
        return next_id++;
    };
    auto retire = [&](int t) { live.erase(std::find(live.begin(), live.end(), t)); };
    for (int i = 0; i < sc.initial_topics; ++i) new_topic(dirichlet_draw(rng, V, sc.topic_concentration));

    std::map<int, double> last_share;  // token share of each topic in the previous epoch
    for (int e = 0; e < sc.n_epochs; ++e) {
        for (const auto* d : directives_at(sc, e, true)) {
            switch (d->kind) {
                case DirectiveKind::Birth: {
                    const int id = new_topic(dirichlet_draw(rng, V, sc.topic_concentration));
                    truth.events.push_back({{e, id}, EventKind::Birth, {}});
                    break;
                }
                case DirectiveKind::Merge: {
                    const int a = d->topics[0], b = d->topics[1];
                    double wa = last_share[a], wb = last_share[b];
                    if (wa + wb <= 0.0) wa = wb = 0.5;
                    std::vector<double> mix(V);
                    for (std::size_t w = 0; w < V; ++w)
                        mix[w] = (wa * phi[a][w] + wb * phi[b][w]) / (wa + wb);
                    retire(a);
                    retire(b);
                    const int id = new_topic(std::move(mix));
                    truth.events.push_back({{e, id}, EventKind::Merge, {{e - 1, a}, {e - 1, b}}});
                    break;
                }
                case DirectiveKind::Drift: {
                    const double mag = d->magnitude != 0.0 ? d->magnitude : sc.drift_noise;
                    phi[d->topics[0]] = perturb(rng, phi[d->topics[0]], mag);
                    break;
                }
                default: break;
            }
        }

        std::vector<int> topics = live;
        std::sort(topics.begin(), topics.end());
        std::vector<TrueTopic> snapshot;
        for (int t : topics) snapshot.push_back({t, phi[t]});
        truth.epochs.push_back(std::move(snapshot));

        std::vector<std::int64_t> token_counts(topics.size(), 0);
        const Date date = mid_window(sc.start_year, sc.epoch_years, e);
        for (int j = 0; j < sc.docs_per_epoch; ++j) {
            DocumentTruth doc_truth;
            doc_truth.id = "s" + std::to_string(e) + "-" + std::to_string(j);
            doc_truth.epoch = e;
            doc_truth.topics = topics;
            doc_truth.mixture = dirichlet_draw(rng, topics.size(), sc.doc_concentration);
            std::string text;
            for (int i = 0; i < sc.tokens_per_doc; ++i) {
                const std::size_t z = sample_discrete(rng, doc_truth.mixture, 1.0);
                ++token_counts[z];
                const std::size_t w = sample_discrete(rng, phi[topics[z]], 1.0);
                if (!text.empty()) text.push_back(' ');
                text += truth.vocab[w];
            }
            out.documents.push_back({doc_truth.id, date, std::move(text)});
            truth.documents.push_back(std::move(doc_truth));
        }
        last_share.clear();
        const double n_tokens = static_cast<double>(sc.docs_per_epoch) * sc.tokens_per_doc;
        for (std::size_t z = 0; z < topics.size(); ++z)
            last_share[topics[z]] = static_cast<double>(token_counts[z]) / n_tokens;

        for (const auto* d : directives_at(sc, e, false)) {
            const int t = d->topics[0];
            if (d->kind == DirectiveKind::Kill) {
                retire(t);
                truth.events.push_back({{e, t}, EventKind::Death, {}});
            } else if (d->kind == DirectiveKind::Split) {
                const double mag = d->magnitude != 0.0 ? d->magnitude : sc.split_noise;
                auto left = perturb(rng, phi[t], mag);
                auto right = perturb(rng, phi[t], mag);
                retire(t);
                const int a = new_topic(std::move(left));
                const int b = new_topic(std::move(right));
                truth.events.push_back({{e, t}, EventKind::Split, {{e + 1, a}, {e + 1, b}}});
            }
        }
    }
    return out;
}

json to_json(const GroundTruth& truth) {
    json epochs = json::array();
    for (std::size_t e = 0; e < truth.epochs.size(); ++e) {
        json topics = json::array();
        for (const auto& t : truth.epochs[e]) topics.push_back({{"id", t.id}, {"phi", t.phi}});
        epochs.push_back({{"epoch", e}, {"topics", std::move(topics)}});
    }
    json events = json::array();
    for (const auto& ev : truth.events) {
        json partners = json::array();
        for (const auto& p : ev.partners) partners.push_back({p.epoch, p.k});
        events.push_back({{"epoch", ev.node.epoch},
                          {"kind", std::string(to_string(ev.kind))},
                          {"topic", ev.node.k},
                          {"partners", std::move(partners)}});
    }
    json docs = json::array();
    for (const auto& d : truth.documents)
        docs.push_back({{"id", d.id}, {"epoch", d.epoch}, {"topics", d.topics}, {"mixture", d.mixture}});
    return json{{"start_year", truth.start_year}, {"epoch_years", truth.epoch_years},
                {"vocab", truth.vocab},           {"epochs", std::move(epochs)},
                {"events", std::move(events)},    {"documents", std::move(docs)}};
}

GroundTruth ground_truth_from_json(const json& j) {
    try {
        GroundTruth t;
        t.start_year = j.value("start_year", 2000);
        t.epoch_years = j.value("epoch_years", 1);
        t.vocab = j.at("vocab").get<std::vector<std::string>>();
        for (const auto& e : j.at("epochs")) {
            std::vector<TrueTopic> topics;
            for (const auto& tp : e.at("topics"))
                topics.push_back({tp.at("id").get<int>(), tp.at("phi").get<std::vector<double>>()});
            t.epochs.push_back(std::move(topics));
        }
        for (const auto& ev : j.at("events")) {
            auto kind = parse_event_kind(ev.at("kind").get<std::string>());
            if (!kind) throw ValidationError("unknown event kind in ground truth");
            TopicEvent out{{ev.at("epoch").get<int>(), ev.at("topic").get<int>()}, *kind, {}};
            for (const auto& p : ev.at("partners")) out.partners.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
            t.events.push_back(std::move(out));
        }
        for (const auto& d : j.value("documents", json::array()))
            t.documents.push_back({d.at("id").get<std::string>(), d.at("epoch").get<int>(),
                                   d.at("topics").get<std::vector<int>>(),
                                   d.at("mixture").get<std::vector<double>>()});
        return t;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed ground truth: ") + e.what());
    }
}

namespace {

// Detected vocabulary id -> synthetic term id (-1 if the term is foreign).
std::vector<int> projection(const Vocabulary& vocab, const GroundTruth& truth) {
    std::unordered_map<std::string, int> truth_index;
    for (std::size_t i = 0; i < truth.vocab.size(); ++i) truth_index.emplace(truth.vocab[i], static_cast<int>(i));
    std::vector<int> out(vocab.size(), -1);
    for (std::size_t i = 0; i < vocab.size(); ++i)
        if (auto it = truth_index.find(vocab.terms[i]); it != truth_index.end()) out[i] = it->second;
    return out;
}

std::pair<int, double> best_match(const Topic& topic, const std::vector<int>& proj,
                                  const GroundTruth& truth) {
    const int e = topic.id.epoch;
    if (e < 0 || static_cast<std::size_t>(e) >= truth.epochs.size()) return {-1, 0.0};
    std::vector<double> projected(truth.vocab.size(), 0.0);
    for (std::size_t w = 0; w < proj.size() && w < topic.phi.size(); ++w)
        if (proj[w] >= 0) projected[static_cast<std::size_t>(proj[w])] += topic.phi[w];
    int best = -1;
    double best_bc = -1.0;
    for (const auto& t : truth.epochs[static_cast<std::size_t>(e)]) {
        const double bc = bhattacharyya(projected, t.phi);
        if (bc > best_bc) {
            best_bc = bc;
            best = t.id;
        }
    }
    return {best, best_bc};
}

}  // namespace

std::pair<int, double> match_true_topic(const Topic& topic, const Vocabulary& vocab,
                                        const GroundTruth& truth) {
    return best_match(topic, projection(vocab, truth), truth);
}

EventScores score_events(std::span<const TopicEvent> detected, std::span<const EpochModel> models,
                         const Vocabulary& vocab, const GroundTruth& truth, int epoch_tolerance) {
    const auto proj = projection(vocab, truth);
    std::map<TopicId, int> matched;
    for (const auto& m : models)
        for (const auto& topic : m.topics) matched[topic.id] = best_match(topic, proj, truth).first;
    auto true_topic_of = [&](TopicId id) {
        auto it = matched.find(id);
        return it == matched.end() ? -1 : it->second;
    };

    EventScores scores;
    const EventKind kinds[] = {EventKind::Birth, EventKind::Death, EventKind::Split, EventKind::Merge};
    for (auto kind : kinds) {
        KindScore s;
        auto pairs_up = [&](const TopicEvent& d, const TopicEvent& t) {
            return std::abs(d.node.epoch - t.node.epoch) <= epoch_tolerance &&
                   true_topic_of(d.node) == t.node.k;
        };
        for (const auto& t : truth.events) {
            if (t.kind != kind) continue;
            ++s.truth_count;
            if (std::any_of(detected.begin(), detected.end(),
                            [&](const TopicEvent& d) { return d.kind == kind && pairs_up(d, t); }))
                ++s.recovered;
        }
        for (const auto& d : detected) {
            if (d.kind != kind) continue;
            ++s.detected_count;
            if (std::any_of(truth.events.begin(), truth.events.end(),
                            [&](const TopicEvent& t) { return t.kind == kind && pairs_up(d, t); }))
                ++s.correct;
        }
        s.zero_detections = s.detected_count == 0;
        s.precision = s.zero_detections ? 1.0 : static_cast<double>(s.correct) / s.detected_count;
        s.recall = s.truth_count == 0 ? 1.0 : static_cast<double>(s.recovered) / s.truth_count;
        scores[kind] = s;
    }
    return scores;
}

json to_json(const EventScores& scores) {
    json out = json::object();
    for (const auto& [kind, s] : scores)
        out[std::string(to_string(kind))] = {{"truth", s.truth_count},
                                             {"detected", s.detected_count},
                                             {"recovered", s.recovered},
                                             {"correct", s.correct},
                                             {"precision", s.precision},
                                             {"recall", s.recall},
                                             {"zero_detections", s.zero_detections}};
    return out;
}

}  // namespace topictrace
