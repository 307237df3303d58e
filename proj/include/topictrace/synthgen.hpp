#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "topictrace/corpus.hpp"
#include "topictrace/graph.hpp"
#include "topictrace/hdp.hpp"

namespace topictrace {

enum class DirectiveKind { Birth, Kill, Split, Merge, Drift };

// Epoch semantics match the node an event attaches to in the temporal graph:
//   Birth(e)       new topic first live at e
//   Kill(e, t)     t last live at e
//   Split(e, t)    t live at e, replaced by two perturbed copies from e + 1
//   Merge(e, a, b) a and b last live at e - 1, their mixture live from e
//   Drift(e, t)    t perturbed from e on
// New topics receive ids in creation order, continuing after the initial ones.
struct Directive {
    int epoch = 0;
    DirectiveKind kind = DirectiveKind::Birth;
    std::vector<int> topics;
    double magnitude = 0.0;  // Split/Drift noise scale; 0 selects the scenario default
};

struct Scenario {
    int n_epochs = 1;
    int vocab_size = 100;
    int docs_per_epoch = 100;
    int tokens_per_doc = 50;
    int initial_topics = 1;
    std::vector<Directive> script;
    std::uint64_t seed = 1;
    int start_year = 2000;
    int epoch_years = 1;
    double topic_concentration = 0.1;
    double doc_concentration = 0.5;
    double split_noise = 1.0;
    double drift_noise = 0.5;

    // Throws ValidationError for bad sizes or a script that references a
    // topic that is not live or leaves an epoch without topics.
    void validate() const;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);

struct TrueTopic {
    int id = 0;
    std::vector<double> phi;
};

struct DocumentTruth {
    std::string id;
    int epoch = 0;
    std::vector<int> topics;
    std::vector<double> mixture;
};

struct GroundTruth {
    std::vector<std::string> vocab;              // term string per synthetic term id
    std::vector<std::vector<TrueTopic>> epochs;  // live topics per epoch
    std::vector<TopicEvent> events;              // node ids are (epoch, true topic id)
    std::vector<DocumentTruth> documents;
    int start_year = 2000;
    int epoch_years = 1;
};

struct SyntheticCorpus {
    std::vector<RawDocument> documents;
    GroundTruth truth;
};

// Synthetic alphabetic term for a term id ("qaaaa", "qaaab", ...).
std::string synthetic_term(int id);

SyntheticCorpus generate(const Scenario& scenario);

nlohmann::json to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const nlohmann::json& j);

struct KindScore {
    std::size_t truth_count = 0;
    std::size_t detected_count = 0;
    std::size_t recovered = 0;  // truth events found
    std::size_t correct = 0;    // detected events that match a truth event
    double precision = 1.0;     // 1 by convention when nothing was detected
    double recall = 0.0;        // 1 by convention when there is nothing to find
    bool zero_detections = false;
};

using EventScores = std::map<EventKind, KindScore>;

// Maps every detected topic to the live true topic with the highest
// Bhattacharyya coefficient, then counts an event as recovered when a
// detected event of the same kind sits on the matched topic within
// `epoch_tolerance` epochs. Scores Birth, Death, Split and Merge.
EventScores score_events(std::span<const TopicEvent> detected, std::span<const EpochModel> models,
                         const Vocabulary& vocab, const GroundTruth& truth, int epoch_tolerance = 0);

// Best-matching true topic at the detected topic's epoch and its coefficient;
// id -1 when that epoch has no ground truth.
std::pair<int, double> match_true_topic(const Topic& topic, const Vocabulary& vocab,
                                        const GroundTruth& truth);

nlohmann::json to_json(const EventScores& scores);

}  // namespace topictrace
