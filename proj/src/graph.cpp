#include "topictrace/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <sstream>

#include "topictrace/errors.hpp"

namespace topictrace {

std::string_view to_string(CdfScope scope) {
    return scope == CdfScope::Global ? "global" : "per-pair";
}

std::optional<CdfScope> parse_cdf_scope(std::string_view name) {
    if (name == "global") return CdfScope::Global;
    if (name == "per-pair" || name == "per_pair") return CdfScope::PerPair;
    return std::nullopt;
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Birth: return "birth";
        case EventKind::Death: return "death";
        case EventKind::Evolution: return "evolution";
        case EventKind::Split: return "split";
        case EventKind::Merge: return "merge";
    }
    return "unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
    for (auto k : {EventKind::Birth, EventKind::Death, EventKind::Evolution, EventKind::Split,
                   EventKind::Merge})
        if (to_string(k) == name) return k;
    return std::nullopt;
}

std::string_view to_string(LifespanRule rule) {
    return rule == LifespanRule::MaxSimilarity ? "max-similarity" : "sole-parent";
}

std::string_view to_string(TerminalCause cause) {
    switch (cause) {
        case TerminalCause::NoDescendants: return "no-descendants";
        case TerminalCause::SplitWithoutSoleHeir: return "split-without-sole-heir";
        case TerminalCause::MergeWithoutSoleHeir: return "merge-without-sole-heir";
        case TerminalCause::CorpusEnd: return "corpus-end";
    }
    return "unknown";
}

TemporalGraph::TemporalGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    std::size_t n_layers = 0;
    for (const auto& n : nodes_) n_layers = std::max(n_layers, n.layer + 1);
    layers_.resize(n_layers);
    for (std::size_t i = 0; i < nodes_.size(); ++i) layers_[nodes_[i].layer].push_back(i);
    out_.resize(nodes_.size());
    in_.resize(nodes_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto& edge = edges_[e];
        if (edge.from >= nodes_.size() || edge.to >= nodes_.size() ||
            nodes_[edge.to].layer != nodes_[edge.from].layer + 1)
            throw ValidationError("graph edge must join consecutive epochs");
        out_[edge.from].push_back(e);
        in_[edge.to].push_back(e);
    }
}

int TemporalGraph::layer_epoch(std::size_t t) const {
    return layers_[t].empty() ? -1 : nodes_[layers_[t].front()].id.epoch;
}

std::optional<std::size_t> TemporalGraph::find(TopicId id) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].id == id) return i;
    return std::nullopt;
}

TemporalGraph build_full_graph(std::span<const EpochModel> models, MeasureKind measure_kind) {
    if (models.size() < 2) throw ValidationError("need >= 2 epochs to build a temporal graph");
    std::vector<GraphNode> nodes;
    std::vector<std::size_t> first_of_layer;
    for (std::size_t t = 0; t < models.size(); ++t) {
        if (models[t].topics.empty())
            throw ValidationError("epoch " + std::to_string(models[t].epoch.index) + " has no topics");
        first_of_layer.push_back(nodes.size());
        for (const auto& topic : models[t].topics) nodes.push_back({topic.id, t, topic.popularity});
    }
    std::vector<GraphEdge> edges;
    for (std::size_t t = 0; t + 1 < models.size(); ++t) {
        const auto& a = models[t].topics;
        const auto& b = models[t + 1].topics;
        for (std::size_t j = 0; j < a.size(); ++j)
            for (std::size_t k = 0; k < b.size(); ++k)
                edges.push_back({first_of_layer[t] + j, first_of_layer[t + 1] + k,
                                 similarity(measure_kind, a[j].phi, b[k].phi)});
    }
    TemporalGraph g(std::move(nodes), std::move(edges));
    g.measure = measure_kind;
    g.candidate_edges = g.edges().size();
    return g;
}

std::vector<double> edge_weights(const TemporalGraph& graph) {
    std::vector<double> w;
    w.reserve(graph.edges().size());
    for (const auto& e : graph.edges()) w.push_back(e.weight);
    return w;
}

std::vector<double> edge_weights(const TemporalGraph& graph, std::size_t layer_pair) {
    std::vector<double> w;
    for (const auto& e : graph.edges())
        if (graph.nodes()[e.from].layer == layer_pair) w.push_back(e.weight);
    return w;
}

TemporalGraph prune(const TemporalGraph& full, double zeta, CdfScope scope) {
    validate_zeta(zeta);
    if (full.pruned) throw ValidationError("prune expects the fully connected graph");
    std::vector<double> thresholds;
    if (scope == CdfScope::Global) {
        thresholds.push_back(EmpiricalCDF(edge_weights(full)).threshold_at(zeta));
    } else {
        for (std::size_t t = 0; t + 1 < full.num_layers(); ++t)
            thresholds.push_back(EmpiricalCDF(edge_weights(full, t)).threshold_at(zeta));
    }
    std::vector<GraphEdge> kept;
    for (const auto& e : full.edges()) {
        const double thr =
            scope == CdfScope::Global ? thresholds[0] : thresholds[full.nodes()[e.from].layer];
        if (e.weight >= thr) kept.push_back(e);
    }
    TemporalGraph g(std::vector<GraphNode>(full.nodes().begin(), full.nodes().end()),
                    std::move(kept));
    g.measure = full.measure;
    g.scope = scope;
    g.pruned = true;
    g.zeta = zeta;
    g.thresholds = std::move(thresholds);
    g.candidate_edges = full.candidate_edges;
    return g;
}

std::vector<TopicEvent> classify_events(const TemporalGraph& g) {
    std::vector<TopicEvent> events;
    const auto nodes = g.nodes();
    const auto edges = g.edges();
    for (std::size_t v = 0; v < nodes.size(); ++v) {
        const TopicId id = nodes[v].id;
        auto children = [&] {
            std::vector<TopicId> out;
            for (auto e : g.out_edges(v)) out.push_back(nodes[edges[e].to].id);
            return out;
        };
        auto parents = [&] {
            std::vector<TopicId> out;
            for (auto e : g.in_edges(v)) out.push_back(nodes[edges[e].from].id);
            return out;
        };
        if (g.in_degree(v) == 0 && !g.is_first_layer(v)) events.push_back({id, EventKind::Birth, {}});
        if (g.out_degree(v) == 0 && !g.is_last_layer(v)) events.push_back({id, EventKind::Death, {}});
        if (g.out_degree(v) == 1 && g.in_degree(edges[g.out_edges(v)[0]].to) == 1)
            events.push_back({id, EventKind::Evolution, children()});
        if (g.out_degree(v) >= 2) events.push_back({id, EventKind::Split, children()});
        if (g.in_degree(v) >= 2) events.push_back({id, EventKind::Merge, parents()});
    }
    return events;
}

std::vector<EventRates> event_rates(std::span<const TopicEvent> events, const TemporalGraph& graph) {
    std::vector<EventRates> rates(graph.num_layers());
    std::map<int, std::size_t> layer_of_epoch;
    for (std::size_t t = 0; t < graph.num_layers(); ++t) {
        rates[t].epoch = graph.layer_epoch(t);
        rates[t].num_topics = graph.layer(t).size();
        layer_of_epoch[rates[t].epoch] = t;
    }
    for (const auto& ev : events) {
        auto it = layer_of_epoch.find(ev.node.epoch);
        if (it == layer_of_epoch.end()) continue;
        auto& r = rates[it->second];
        switch (ev.kind) {
            case EventKind::Birth: r.births += 1; break;
            case EventKind::Death: r.deaths += 1; break;
            case EventKind::Split: r.splits += 1; break;
            case EventKind::Merge: r.merges += 1; break;
            case EventKind::Evolution: break;
        }
    }
    for (auto& r : rates) {
        if (r.num_topics == 0) continue;
        const double k = static_cast<double>(r.num_topics);
        r.births /= k;
        r.deaths /= k;
        r.splits /= k;
        r.merges /= k;
    }
    return rates;
}

TopicId find_topic_by_terms(std::span<const EpochModel> models,
                            std::span<const std::string> terms, const Vocabulary& vocab) {
    std::vector<std::uint32_t> ids;
    std::string unknown;
    for (const auto& t : terms) {
        if (auto id = vocab.find(t))
            ids.push_back(*id);
        else
            unknown += (unknown.empty() ? "" : ", ") + t;
    }
    if (!unknown.empty()) throw ValidationError("unknown term(s): " + unknown);
    std::optional<TopicId> best;
    double best_mass = -1.0;
    for (const auto& m : models) {
        for (const auto& topic : m.topics) {
            double mass = 0.0;
            for (auto w : ids) mass += topic.phi[w];
            // strict comparison keeps the earliest epoch / lowest id on ties
            if (mass > best_mass) {
                best_mass = mass;
                best = topic.id;
            }
        }
    }
    if (!best) throw ValidationError("no topics to search");
    return *best;
}

TemporalGraph trace(const TemporalGraph& g, TopicId root, Direction direction) {
    auto start = g.find(root);
    if (!start) throw ValidationError("trace: topic not in graph");
    const auto edges = g.edges();
    std::vector<bool> seen(g.nodes().size(), false);
    std::vector<std::size_t> kept_edges;
    std::deque<std::size_t> queue{*start};
    seen[*start] = true;
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        const auto incident = direction == Direction::Forward ? g.out_edges(v) : g.in_edges(v);
        for (auto e : incident) {
            kept_edges.push_back(e);
            const std::size_t u = direction == Direction::Forward ? edges[e].to : edges[e].from;
            if (!seen[u]) {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    std::vector<std::size_t> remap(g.nodes().size(), 0);
    std::vector<GraphNode> nodes;
    for (std::size_t v = 0; v < g.nodes().size(); ++v) {
        if (!seen[v]) continue;
        remap[v] = nodes.size();
        nodes.push_back(g.nodes()[v]);
    }
    std::sort(kept_edges.begin(), kept_edges.end());
    std::vector<GraphEdge> sub_edges;
    for (auto e : kept_edges) sub_edges.push_back({remap[edges[e].from], remap[edges[e].to], edges[e].weight});
    TemporalGraph sub(std::move(nodes), std::move(sub_edges));
    sub.measure = g.measure;
    sub.scope = g.scope;
    sub.pruned = g.pruned;
    sub.zeta = g.zeta;
    sub.thresholds = g.thresholds;
    sub.candidate_edges = g.candidate_edges;
    return sub;
}

namespace {

// Better child: larger weight, then lower topic id.
bool better_child(const TemporalGraph& g, std::size_t e_a, std::size_t e_b) {
    const auto& a = g.edges()[e_a];
    const auto& b = g.edges()[e_b];
    if (a.weight != b.weight) return a.weight > b.weight;
    return g.nodes()[a.to].id.k < g.nodes()[b.to].id.k;
}

bool is_created(const TemporalGraph& g, std::size_t v) {
    if (g.in_degree(v) == 0 || g.in_degree(v) >= 2) return true;
    const std::size_t parent = g.edges()[g.in_edges(v)[0]].from;
    return g.out_degree(parent) >= 2;
}

LifespanRecord finish(const TemporalGraph& g, LifespanRule rule, const std::vector<std::size_t>& path,
                      TerminalCause cause_if_alive) {
    LifespanRecord r;
    r.rule = rule;
    const auto& first = g.nodes()[path.front()];
    const auto& last = g.nodes()[path.back()];
    r.creation = first.id.epoch;
    r.death = last.id.epoch;
    r.lifespan = static_cast<int>(last.layer - first.layer) + 1;
    for (auto v : path) r.chain.push_back(g.nodes()[v].id);
    if (g.is_last_layer(path.back())) {
        r.terminal_cause = TerminalCause::CorpusEnd;
        r.censored = true;
    } else {
        r.terminal_cause = cause_if_alive;
    }
    return r;
}

}  // namespace

std::vector<LifespanRecord> lifespans(const TemporalGraph& g, LifespanRule rule) {
    const auto edges = g.edges();
    const std::size_t n = g.nodes().size();
    std::vector<LifespanRecord> out;

    if (rule == LifespanRule::MaxSimilarity) {
        for (std::size_t v = 0; v < n; ++v) {
            if (!is_created(g, v)) continue;
            std::vector<std::size_t> path{v};
            for (std::size_t cur = v; g.out_degree(cur) > 0;) {
                std::size_t best = g.out_edges(cur)[0];
                for (auto e : g.out_edges(cur))
                    if (better_child(g, e, best)) best = e;
                cur = edges[best].to;
                path.push_back(cur);
            }
            out.push_back(finish(g, rule, path, TerminalCause::NoDescendants));
        }
        return out;
    }

    // Longest continuation through children whose only parent is the current
    // node, computed back to front over the layers.
    std::vector<int> length(n, 1);
    std::vector<std::ptrdiff_t> next(n, -1);
    for (std::size_t t = g.num_layers(); t-- > 0;) {
        for (auto v : g.layer(t)) {
            std::ptrdiff_t best_edge = -1;
            for (auto e : g.out_edges(v)) {
                const std::size_t c = edges[e].to;
                if (g.in_degree(c) != 1) continue;
                if (best_edge < 0 || length[c] > length[edges[best_edge].to] ||
                    (length[c] == length[edges[best_edge].to] &&
                     better_child(g, e, static_cast<std::size_t>(best_edge))))
                    best_edge = static_cast<std::ptrdiff_t>(e);
            }
            if (best_edge >= 0) {
                next[v] = static_cast<std::ptrdiff_t>(edges[best_edge].to);
                length[v] = 1 + length[edges[best_edge].to];
            }
        }
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (!is_created(g, v)) continue;
        std::vector<std::size_t> path{v};
        while (next[path.back()] >= 0) path.push_back(static_cast<std::size_t>(next[path.back()]));
        const std::size_t end = path.back();
        TerminalCause cause = TerminalCause::NoDescendants;
        if (g.out_degree(end) >= 2)
            cause = TerminalCause::SplitWithoutSoleHeir;
        else if (g.out_degree(end) == 1)
            cause = TerminalCause::MergeWithoutSoleHeir;
        out.push_back(finish(g, rule, path, cause));
    }
    return out;
}

double mean_lifespan(std::span<const LifespanRecord> records) {
    if (records.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& r : records) sum += r.lifespan;
    return sum / static_cast<double>(records.size());
}

namespace {

std::string node_name(TopicId id) {
    return "\"" + std::to_string(id.epoch) + ":" + std::to_string(id.k) + "\"";
}

std::string fmt(double v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string to_dot(const TemporalGraph& g, const std::map<TopicId, std::string>& labels) {
    // node width = kDotScale * popularity (inches)
    constexpr double kDotScale = 4.0;
    std::ostringstream os;
    os << "digraph topics {\n"
       << "  rankdir=LR;\n"
       << "  node [shape=circle, fixedsize=true, fontsize=8];\n";
    for (std::size_t t = 0; t < g.num_layers(); ++t) {
        if (g.layer(t).empty()) continue;
        os << "  subgraph epoch_" << g.layer_epoch(t) << " {\n    rank=same;\n";
        for (auto v : g.layer(t)) {
            const auto& node = g.nodes()[v];
            std::string label = std::to_string(node.id.epoch) + ":" + std::to_string(node.id.k);
            if (auto it = labels.find(node.id); it != labels.end()) label += "\\n" + escape(it->second);
            const double width = kDotScale * node.popularity;
            os << "    " << node_name(node.id) << " [label=\"" << label << "\", width=" << fmt(width, 4)
               << ", height=" << fmt(width, 4) << "];\n";
        }
        os << "  }\n";
    }
    for (const auto& e : g.edges()) {
        os << "  " << node_name(g.nodes()[e.from].id) << " -> " << node_name(g.nodes()[e.to].id)
           << " [label=\"" << fmt(e.weight, 3) << "\", penwidth=" << fmt(0.5 + 3.0 * e.weight, 3)
           << "];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace topictrace
