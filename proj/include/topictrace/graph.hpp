#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topictrace/corpus.hpp"
#include "topictrace/hdp.hpp"
#include "topictrace/similarity.hpp"

namespace topictrace {

enum class CdfScope { Global, PerPair };

std::string_view to_string(CdfScope scope);
std::optional<CdfScope> parse_cdf_scope(std::string_view name);

struct GraphNode {
    TopicId id;
    std::size_t layer = 0;  // position among the fitted epochs
    double popularity = 0.0;
};

struct GraphEdge {
    std::size_t from = 0;  // node indices
    std::size_t to = 0;
    double weight = 0.0;
};

// Layered directed graph: layer t holds the topics of the t-th fitted epoch,
// and edges only run from layer t to layer t + 1.
class TemporalGraph {
public:
    MeasureKind measure = MeasureKind::Bhattacharyya;
    CdfScope scope = CdfScope::Global;
    bool pruned = false;
    double zeta = 0.0;
    std::vector<double> thresholds;  // one (global) or one per layer pair
    std::size_t candidate_edges = 0;

    TemporalGraph() = default;
    TemporalGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges);

    std::span<const GraphNode> nodes() const { return nodes_; }
    std::span<const GraphEdge> edges() const { return edges_; }
    std::size_t num_layers() const { return layers_.size(); }
    std::span<const std::size_t> layer(std::size_t t) const { return layers_[t]; }
    int layer_epoch(std::size_t t) const;

    std::span<const std::size_t> out_edges(std::size_t node) const { return out_[node]; }
    std::span<const std::size_t> in_edges(std::size_t node) const { return in_[node]; }
    std::size_t out_degree(std::size_t node) const { return out_[node].size(); }
    std::size_t in_degree(std::size_t node) const { return in_[node].size(); }

    std::optional<std::size_t> find(TopicId id) const;
    bool is_first_layer(std::size_t node) const { return nodes_[node].layer == 0; }
    bool is_last_layer(std::size_t node) const { return nodes_[node].layer + 1 == layers_.size(); }

private:
    std::vector<GraphNode> nodes_;
    std::vector<GraphEdge> edges_;
    std::vector<std::vector<std::size_t>> layers_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
};

// Connects every topic of each fitted epoch to every topic of the next, with
// the oriented similarity of their term distributions as weight.
// Throws ValidationError for fewer than two epochs.
TemporalGraph build_full_graph(std::span<const EpochModel> models, MeasureKind measure);

// Candidate weights feeding the CDF; for PerPair scope, those of one layer pair.
std::vector<double> edge_weights(const TemporalGraph& graph);
std::vector<double> edge_weights(const TemporalGraph& graph, std::size_t layer_pair);

// Keeps an edge iff its weight >= the lower zeta-quantile of the candidate
// weights. Nodes are never removed.
TemporalGraph prune(const TemporalGraph& full, double zeta, CdfScope scope = CdfScope::Global);

enum class EventKind { Birth, Death, Evolution, Split, Merge };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

struct TopicEvent {
    TopicId node;
    EventKind kind;
    std::vector<TopicId> partners;
};

// Degree rules on a pruned graph. A node may carry several kinds.
std::vector<TopicEvent> classify_events(const TemporalGraph& graph);

struct EventRates {
    int epoch = 0;
    std::size_t num_topics = 0;
    double births = 0.0;
    double deaths = 0.0;
    double merges = 0.0;
    double splits = 0.0;
};

// Per-epoch event counts divided by that epoch's topic count.
std::vector<EventRates> event_rates(std::span<const TopicEvent> events, const TemporalGraph& graph);

// argmax over all topics of the summed probability of the query terms; ties go
// to the earlier epoch, then the lower topic id. Throws ValidationError naming
// an unknown term.
TopicId find_topic_by_terms(std::span<const EpochModel> models,
                            std::span<const std::string> terms, const Vocabulary& vocab);

enum class Direction { Forward, Backward };

// Subgraph of everything reachable from `root` along surviving edges.
TemporalGraph trace(const TemporalGraph& graph, TopicId root, Direction direction);

enum class LifespanRule { MaxSimilarity, SoleParent };
enum class TerminalCause { NoDescendants, SplitWithoutSoleHeir, MergeWithoutSoleHeir, CorpusEnd };

std::string_view to_string(LifespanRule rule);
std::string_view to_string(TerminalCause cause);

struct LifespanRecord {
    LifespanRule rule = LifespanRule::MaxSimilarity;
    int creation = 0;  // epoch index
    std::vector<TopicId> chain;
    int death = 0;     // epoch index of the last chain node
    int lifespan = 1;  // in epochs, inclusive
    TerminalCause terminal_cause = TerminalCause::NoDescendants;
    bool censored = false;
};

// One record per created topic: first-epoch topics, births, merge products
// and split offspring.
std::vector<LifespanRecord> lifespans(const TemporalGraph& graph, LifespanRule rule);

double mean_lifespan(std::span<const LifespanRecord> records);

// Graphviz export with one rank per epoch. `labels` maps node ids to label text.
std::string to_dot(const TemporalGraph& graph, const std::map<TopicId, std::string>& labels = {});

}  // namespace topictrace
