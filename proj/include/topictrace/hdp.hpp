#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "topictrace/corpus.hpp"
#include "topictrace/random.hpp"

namespace topictrace {

struct Hyperparameters {
    double gamma = 1.0;   // corpus-level concentration
    double alpha0 = 1.0;  // document-level concentration
    double eta = 0.01;    // symmetric Dirichlet base measure over the vocabulary
    std::uint64_t seed = 1;

    void validate() const;
};

// Direct-assignment state of the collapsed sampler for one epoch.
// Topic ids 0..K-1 are always live (non-empty) between sweeps.
struct SamplerState {
    std::size_t vocab_size = 0;
    std::vector<std::vector<std::uint32_t>> words;        // [doc][token]
    std::vector<std::vector<std::int32_t>> assignments;   // [doc][token] -> topic
    std::vector<std::vector<std::int32_t>> word_topic;    // [word][topic], n_kw stored word-major
    std::vector<std::int64_t> topic_totals;               // n_k
    std::vector<std::vector<std::int32_t>> doc_topic;     // [doc][topic], n_jk
    std::vector<std::int64_t> table_counts;               // m_k
    std::vector<double> global_weights;                   // beta_1..beta_K, then remainder
    Rng rng;

    std::size_t num_topics() const { return topic_totals.size(); }
    std::int64_t num_tokens() const;
    double remainder_weight() const { return global_weights.back(); }

    // Throws std::logic_error if the count tables disagree with the assignments.
    void check_consistency() const;
};

// Seats every token in order with the incremental predictive rule, then
// samples table counts and global weights. Throws ValidationError on an
// epoch without tokens.
SamplerState init_state(std::span<const EncodedDocument> docs, std::size_t vocab_size,
                        const Hyperparameters& hp);
SamplerState init_state(std::span<const std::vector<std::uint32_t>> docs, std::size_t vocab_size,
                        const Hyperparameters& hp);

// One full Gibbs pass over every token, followed by empty-topic compaction and
// auxiliary resampling of table counts and global weights.
void gibbs_sweep(SamplerState& state, const Hyperparameters& hp);

// log p(words, assignments | global weights) with topic-term distributions and
// document mixtures integrated out.
double log_likelihood(const SamplerState& state, const Hyperparameters& hp);

struct TopicId {
    int epoch = 0;
    int k = 0;
    friend bool operator==(const TopicId&, const TopicId&) = default;
    friend auto operator<=>(const TopicId&, const TopicId&) = default;
};

struct Topic {
    TopicId id;
    std::vector<double> phi;
    double popularity = 0.0;
};

std::vector<Topic> estimate_topics(const SamplerState& state, const Hyperparameters& hp,
                                   int epoch_index = 0);

// phi_k[w] = (n_kw + eta) / (n_k + V eta); exposed for the degenerate eta == 0 case.
std::vector<double> smoothed_distribution(std::span<const std::int64_t> counts, double eta);

struct EpochModel {
    Epoch epoch;
    std::size_t num_documents = 0;
    std::vector<Topic> topics;
    std::vector<std::vector<double>> doc_mixtures;
    std::vector<double> loglik_trace;

    std::size_t num_topics() const { return topics.size(); }
};

struct FitOptions {
    int sweeps = 500;
    int burn_in = 300;
    void validate() const;
};

EpochModel fit_epoch(std::span<const EncodedDocument> docs, std::size_t vocab_size,
                     const Hyperparameters& hp, const FitOptions& options, Epoch epoch = {});

struct FitAllResult {
    std::vector<EpochModel> models;
    std::vector<std::string> warnings;
};

// Fits every non-empty epoch with the same hyperparameters and vocabulary.
// Each epoch's seed is derived from hp.seed and the epoch index, so results do
// not depend on `jobs`.
FitAllResult fit_all_epochs(const std::vector<EncodedDocument>& docs,
                            const std::vector<Epoch>& epochs, std::size_t vocab_size,
                            const Hyperparameters& hp, const FitOptions& options, int jobs = 1);

}  // namespace topictrace
