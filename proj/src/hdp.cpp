#include "topictrace/hdp.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "topictrace/errors.hpp"

namespace topictrace {

namespace {

constexpr double kMinWeight = std::numeric_limits<double>::min();
constexpr int kSplitMergeProposals = 3;
constexpr int kLaunchScans = 10;
constexpr double kShareConcentration = 20.0;
constexpr double kMinShare = 1e-12;

void add_topic(SamplerState& s) {
    for (auto& row : s.word_topic) row.push_back(0);
    for (auto& row : s.doc_topic) row.push_back(0);
    s.topic_totals.push_back(0);
    s.table_counts.push_back(0);
}

// Beta(1, gamma) by inversion.
double stick_fraction(Rng& rng, double gamma) {
    const double u = uniform01(rng);
    return 1.0 - std::pow(1.0 - u, 1.0 / gamma);
}

// Draws a topic for token (j, i) from its full conditional given the current
// counts (which must already exclude the token) and records it.
void seat_token(SamplerState& s, std::size_t j, std::size_t i, const Hyperparameters& hp,
                std::vector<double>& probs) {
    const std::uint32_t w = s.words[j][i];
    const std::size_t K = s.num_topics();
    const double v_eta = static_cast<double>(s.vocab_size) * hp.eta;
    const auto& nw = s.word_topic[w];
    const auto& nj = s.doc_topic[j];

    probs.resize(K + 1);
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double p = (nj[k] + hp.alpha0 * s.global_weights[k]) * (nw[k] + hp.eta) /
                         (static_cast<double>(s.topic_totals[k]) + v_eta);
        probs[k] = p;
        total += p;
    }
    probs[K] = hp.alpha0 * s.remainder_weight() / static_cast<double>(s.vocab_size);
    total += probs[K];

    std::size_t k = sample_discrete(s.rng, probs, total);
    if (k == K) {
        const double b = stick_fraction(s.rng, hp.gamma);
        const double rem = s.global_weights.back();
        s.global_weights.back() = std::max(b * rem, kMinWeight);
        s.global_weights.push_back(std::max((1.0 - b) * rem, kMinWeight));
        add_topic(s);
    }
    s.assignments[j][i] = static_cast<std::int32_t>(k);
    ++s.word_topic[w][k];
    ++s.doc_topic[j][k];
    ++s.topic_totals[k];
}

void remove_token(SamplerState& s, std::size_t j, std::size_t i) {
    const auto k = static_cast<std::size_t>(s.assignments[j][i]);
    --s.word_topic[s.words[j][i]][k];
    --s.doc_topic[j][k];
    --s.topic_totals[k];
}

// Drops empty topics, folding their global weight into the remainder, and
// relabels the survivors 0..K'-1 in their existing order.
void compact(SamplerState& s) {
    const std::size_t K = s.num_topics();
    std::vector<std::int32_t> remap(K, -1);
    std::int32_t next = 0;
    for (std::size_t k = 0; k < K; ++k)
        if (s.topic_totals[k] > 0) remap[k] = next++;
    if (static_cast<std::size_t>(next) == K) return;

    auto squeeze_ints = [&](auto& row) {
        std::size_t out = 0;
        for (std::size_t k = 0; k < K; ++k)
            if (remap[k] >= 0) row[out++] = row[k];
        row.resize(out);
    };
    for (auto& row : s.word_topic) squeeze_ints(row);
    for (auto& row : s.doc_topic) squeeze_ints(row);
    squeeze_ints(s.topic_totals);
    squeeze_ints(s.table_counts);

    double rem = s.global_weights.back();
    std::vector<double> weights;
    weights.reserve(static_cast<std::size_t>(next) + 1);
    for (std::size_t k = 0; k < K; ++k) {
        if (remap[k] >= 0)
            weights.push_back(s.global_weights[k]);
        else
            rem += s.global_weights[k];
    }
    weights.push_back(rem);
    s.global_weights = std::move(weights);

    for (auto& doc : s.assignments)
        for (auto& z : doc) z = remap[static_cast<std::size_t>(z)];
}

// Number of tables among n customers of a restaurant with concentration a.
std::int32_t antoniak_draw(Rng& rng, std::int32_t n, double a) {
    std::int32_t m = 1;
    for (std::int32_t l = 1; l < n; ++l)
        if (uniform01(rng) < a / (a + l)) ++m;
    return m;
}

// Sequentially-allocated split-merge moves on (assignments, table counts) with
// the global weights integrated out, targeting the collapsed franchise joint
//   p(z, m) ∝ prod_jk s(n_jk, m_jk) alpha0^m_jk * gamma^K prod_k Gamma(m_k) / Gamma(gamma + M)
//             * prod_k f_k(words of k).
// Table counts of the cells a move creates are proposed from the Antoniak
// distribution, so the Stirling numbers cancel from the acceptance ratio.
struct SplitMergeToken {
    std::uint32_t doc;
    std::uint32_t pos;
};

// Buffers kept between sweeps so that proposals on small corpora do not
// spend their time in the allocator.
struct SplitMergeScratch {
    std::vector<SplitMergeToken> flat, rest;
    std::vector<std::vector<SplitMergeToken>> members;
    std::vector<std::int32_t> word_count[2], doc_count[2];
    std::vector<std::uint32_t> touched_words[2], touched_docs[2], docs, words;
    std::vector<int> side, forced;
};

class SplitMerge {
public:
    SplitMerge(SamplerState& s, const Hyperparameters& hp, SplitMergeScratch& scratch)
        : s_(s), hp_(hp), flat_(scratch.flat), rest_(scratch.rest), members_(scratch.members),
          word_count_(scratch.word_count), doc_count_(scratch.doc_count), touched_words_(scratch.touched_words),
          touched_docs_(scratch.touched_docs), docs_(scratch.docs), words_(scratch.words), side_(scratch.side),
          forced_(scratch.forced) {
        v_eta_ = static_cast<double>(s.vocab_size) * hp.eta;
        flat_.clear();
        for (auto& m : members_) m.clear();
        members_.resize(s.num_topics());
        for (std::size_t j = 0; j < s.words.size(); ++j) {
            for (std::size_t i = 0; i < s.words[j].size(); ++i) {
                flat_.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i)});
                members_[static_cast<std::size_t>(s.assignments[j][i])].push_back(flat_.back());
            }
        }
        word_count_[0].assign(s.vocab_size, 0);
        word_count_[1].assign(s.vocab_size, 0);
        doc_count_[0].assign(s.words.size(), 0);
        doc_count_[1].assign(s.words.size(), 0);
    }

    void propose() {
        if (flat_.size() < 2) return;
        const std::size_t a = s_.rng() % flat_.size();
        std::size_t b = s_.rng() % (flat_.size() - 1);
        if (b >= a) ++b;
        const Token ti = flat_[a], tj = flat_[b];
        const auto ki = static_cast<std::size_t>(s_.assignments[ti.doc][ti.pos]);
        const auto kj = static_cast<std::size_t>(s_.assignments[tj.doc][tj.pos]);
        if (ki == kj)
            try_split(ti, tj, ki);
        else
            try_merge(ti, tj, ki, kj);
    }

private:
    using Token = SplitMergeToken;

    double log_marginal(std::int64_t n_k, const std::vector<std::int32_t>& counts,
                        const std::vector<std::uint32_t>& words) const {
        double f = std::lgamma(v_eta_) - std::lgamma(static_cast<double>(n_k) + v_eta_);
        for (auto w : words) f += std::lgamma(counts[w] + hp_.eta) - std::lgamma(hp_.eta);
        return f;
    }

    // Document factor of p(z | beta) for one topic with weight b.
    double doc_term(std::int32_t n, double b) const {
        const double a = hp_.alpha0 * b;
        return n > 0 ? std::lgamma(a + n) - std::lgamma(a) : 0.0;
    }

    // Proposal for the share v of the first half of a split weight, centred
    // on the share of tokens.
    std::pair<double, double> share_shape() const {
        const double scale = kShareConcentration / static_cast<double>(sizes_[0] + sizes_[1]);
        return {1.0 + scale * static_cast<double>(sizes_[0]), 1.0 + scale * static_cast<double>(sizes_[1])};
    }

    static double log_beta_pdf(double v, double a, double b) {
        return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(v) +
               (b - 1.0) * std::log1p(-v);
    }

    // Log ratio of p(z, beta) between the split pair (shares v, 1 - v of
    // weight b) and the merged topic, without the word terms. The beta prior
    // contributes gamma / (b0 b1) against 1 / b, and the Jacobian of
    // (b, v) -> (b0, b1) is b.
    double split_prior_terms(double v, double b, std::size_t k_merged, const std::size_t* ks) {
        double r = std::log(hp_.gamma) - std::log(v) - std::log1p(-v);
        for (auto j : docs_union()) {
            std::int32_t merged = 0;
            if (ks) {
                merged = s_.doc_topic[j][ks[0]] + s_.doc_topic[j][ks[1]];
            } else {
                merged = s_.doc_topic[j][k_merged];
            }
            r += doc_term(doc_count_[0][j], v * b) + doc_term(doc_count_[1][j], (1.0 - v) * b) -
                 doc_term(merged, b);
        }
        return r;
    }

    // Splits `rest` between the topics anchored at `first` and `second`:
    // restricted scans build the launch state, and one restricted Gibbs scan
    // draws the proposal (or, with `forced`, replays the given allocation)
    // and yields its log probability. The per-side counts are left in the
    // scratch arrays.
    double allocate(const Token& first, const Token& second, const std::vector<Token>& rest, double half,
                    std::vector<int>& side, const std::vector<int>* forced) {
        std::int64_t totals[2] = {0, 0};
        auto add = [&](const Token& t, int c) {
            const auto w = s_.words[t.doc][t.pos];
            if (word_count_[c][w]++ == 0) touched_words_[c].push_back(w);
            if (doc_count_[c][t.doc]++ == 0) touched_docs_[c].push_back(t.doc);
            ++totals[c];
        };
        auto remove = [&](const Token& t, int c) {
            --word_count_[c][s_.words[t.doc][t.pos]];
            --doc_count_[c][t.doc];
            --totals[c];
        };
        auto prob_first = [&](const Token& t) {
            const auto w = s_.words[t.doc][t.pos];
            double p[2];
            for (int c = 0; c < 2; ++c)
                p[c] = (doc_count_[c][t.doc] + half) * (word_count_[c][w] + hp_.eta) /
                       (static_cast<double>(totals[c]) + v_eta_);
            return p[0] / (p[0] + p[1]);
        };

        add(first, 0);
        add(second, 1);
        side.assign(rest.size(), 0);
        // The launch starts from a random halving and is refined greedily;
        // only the last scan is random. A greedy sequential start tends to
        // sort tokens by word alone and stalls far from a split that also
        // respects documents.
        for (std::size_t r = 0; r < rest.size(); ++r) {
            side[r] = static_cast<int>(s_.rng() & 1U);
            add(rest[r], side[r]);
        }
        for (int scan = 0; scan < kLaunchScans; ++scan) {
            bool moved = false;
            for (std::size_t r = 0; r < rest.size(); ++r) {
                remove(rest[r], side[r]);
                const int c = prob_first(rest[r]) >= 0.5 ? 0 : 1;
                moved = moved || c != side[r];
                side[r] = c;
                add(rest[r], side[r]);
            }
            if (!moved) break;
        }
        double log_q = 0.0;
        for (std::size_t r = 0; r < rest.size(); ++r) {
            remove(rest[r], side[r]);
            const double p0 = prob_first(rest[r]);
            side[r] = forced ? (*forced)[r] : (uniform01(s_.rng) < p0 ? 0 : 1);
            log_q += std::log(side[r] == 0 ? p0 : 1.0 - p0);
            add(rest[r], side[r]);
        }
        // a word or document can be re-added after a scan emptied it
        for (int c = 0; c < 2; ++c) {
            for (auto* list : {&touched_words_[c], &touched_docs_[c]}) {
                std::sort(list->begin(), list->end());
                list->erase(std::unique(list->begin(), list->end()), list->end());
            }
        }
        sizes_[0] = totals[0];
        sizes_[1] = totals[1];
        return log_q;
    }

    void clear_scratch() {
        for (int c = 0; c < 2; ++c) {
            for (auto w : touched_words_[c]) word_count_[c][w] = 0;
            for (auto d : touched_docs_[c]) doc_count_[c][d] = 0;
            touched_words_[c].clear();
            touched_docs_[c].clear();
        }
    }

    static const std::vector<std::uint32_t>& merge_lists(const std::vector<std::uint32_t>* lists,
                                                           std::vector<std::uint32_t>& out) {
        out.assign(lists[0].begin(), lists[0].end());
        out.insert(out.end(), lists[1].begin(), lists[1].end());
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
    const std::vector<std::uint32_t>& docs_union() { return merge_lists(touched_docs_, docs_); }
    const std::vector<std::uint32_t>& words_union() { return merge_lists(touched_words_, words_); }

    // Word term of the merged topic; `count` gives its count of each word.
    template <class Count>
    double merged_marginal(std::int64_t n_k, Count count) {
        double f = std::lgamma(v_eta_) - std::lgamma(static_cast<double>(n_k) + v_eta_);
        for (auto w : words_union()) f += std::lgamma(count(w) + hp_.eta) - std::lgamma(hp_.eta);
        return f;
    }

    void shuffle(std::vector<Token>& v) {
        for (std::size_t t = v.size(); t > 1; --t) std::swap(v[t - 1], v[s_.rng() % t]);
    }

    void try_split(const Token& ti, const Token& tj, std::size_t k) {
        auto& rest = rest_;
        auto& side = side_;
        rest.clear();
        for (const auto& t : members_[k])
            if (!(t.doc == ti.doc && t.pos == ti.pos) && !(t.doc == tj.doc && t.pos == tj.pos)) rest.push_back(t);
        shuffle(rest);
        const double b = s_.global_weights[k];
        const double log_q = allocate(ti, tj, rest, 0.5 * hp_.alpha0 * b, side, nullptr);

        const auto [sa, sb] = share_shape();
        const double la = log_gamma_draw(s_.rng, sa), lb = log_gamma_draw(s_.rng, sb);
        const double v = std::clamp(1.0 / (1.0 + std::exp(lb - la)), kMinShare, 1.0 - kMinShare);
        double log_a = -log_q - log_beta_pdf(v, sa, sb) + split_prior_terms(v, b, k, nullptr);
        log_a += log_marginal(sizes_[0], word_count_[0], touched_words_[0]) +
                 log_marginal(sizes_[1], word_count_[1], touched_words_[1]);
        log_a -= merged_marginal(s_.topic_totals[k], [&](std::uint32_t w) { return s_.word_topic[w][k]; });
        clear_scratch();
        if (!(std::log(uniform01(s_.rng)) < log_a)) return;

        // accept: the side of ti becomes a new topic
        const std::size_t k_new = s_.num_topics();
        add_topic(s_);
        s_.global_weights.insert(s_.global_weights.end() - 1, v * b);
        s_.global_weights[k] = (1.0 - v) * b;
        members_.emplace_back();
        auto move_to_new = [&](const Token& t) {
            const auto w = s_.words[t.doc][t.pos];
            s_.assignments[t.doc][t.pos] = static_cast<std::int32_t>(k_new);
            --s_.word_topic[w][k];
            ++s_.word_topic[w][k_new];
            --s_.doc_topic[t.doc][k];
            ++s_.doc_topic[t.doc][k_new];
            --s_.topic_totals[k];
            ++s_.topic_totals[k_new];
        };
        std::vector<Token> keep{tj}, moved{ti};
        move_to_new(ti);
        for (std::size_t r = 0; r < rest.size(); ++r) {
            if (side[r] == 0) {
                move_to_new(rest[r]);
                moved.push_back(rest[r]);
            } else {
                keep.push_back(rest[r]);
            }
        }
        members_[k] = std::move(keep);
        members_[k_new] = std::move(moved);
    }

    void try_merge(const Token& ti, const Token& tj, std::size_t ki, std::size_t kj) {
        auto& rest = rest_;
        auto& side = side_;
        auto& forced = forced_;
        rest.clear();
        forced.clear();
        for (const auto& t : members_[ki])
            if (!(t.doc == ti.doc && t.pos == ti.pos)) rest.push_back(t);
        for (const auto& t : members_[kj])
            if (!(t.doc == tj.doc && t.pos == tj.pos)) rest.push_back(t);
        shuffle(rest);
        for (const auto& t : rest)
            forced.push_back(static_cast<std::size_t>(s_.assignments[t.doc][t.pos]) == ki ? 0 : 1);
        const double b = s_.global_weights[ki] + s_.global_weights[kj];
        const double log_q = allocate(ti, tj, rest, 0.5 * hp_.alpha0 * b, side, &forced);

        // the reverse split would have drawn exactly this share
        const auto [sa, sb] = share_shape();
        const double v = std::clamp(s_.global_weights[ki] / b, kMinShare, 1.0 - kMinShare);
        const std::size_t ks[2] = {ki, kj};
        double log_a = log_q + log_beta_pdf(v, sa, sb) - split_prior_terms(v, b, 0, ks);
        log_a -= log_marginal(sizes_[0], word_count_[0], touched_words_[0]) +
                 log_marginal(sizes_[1], word_count_[1], touched_words_[1]);
        log_a += merged_marginal(s_.topic_totals[ki] + s_.topic_totals[kj],
                                 [&](std::uint32_t w) { return s_.word_topic[w][ki] + s_.word_topic[w][kj]; });
        clear_scratch();
        if (!(std::log(uniform01(s_.rng)) < log_a)) return;

        // accept: everything of ki moves into kj; ki is left empty
        for (const auto& t : members_[ki]) {
            const auto w = s_.words[t.doc][t.pos];
            s_.assignments[t.doc][t.pos] = static_cast<std::int32_t>(kj);
            --s_.word_topic[w][ki];
            ++s_.word_topic[w][kj];
            --s_.doc_topic[t.doc][ki];
            ++s_.doc_topic[t.doc][kj];
        }
        s_.topic_totals[kj] += s_.topic_totals[ki];
        s_.topic_totals[ki] = 0;
        s_.global_weights[kj] = b;
        s_.global_weights[ki] = 0.0;
        members_[kj].insert(members_[kj].end(), members_[ki].begin(), members_[ki].end());
        members_[ki].clear();
    }

    SamplerState& s_;
    const Hyperparameters& hp_;
    double v_eta_ = 0.0;
    std::vector<Token>& flat_;
    std::vector<Token>& rest_;
    std::vector<std::vector<Token>>& members_;
    std::vector<std::int32_t>* word_count_;
    std::vector<std::int32_t>* doc_count_;
    std::vector<std::uint32_t>* touched_words_;
    std::vector<std::uint32_t>* touched_docs_;
    std::vector<std::uint32_t>& docs_;
    std::vector<std::uint32_t>& words_;
    std::vector<int>& side_;
    std::vector<int>& forced_;
    std::int64_t sizes_[2] = {0, 0};
};

// Split-merge moves on (assignments, beta) with the table counts summed out,
// then table counts by the Antoniak construction and beta ~ Dir(m_1..m_K, gamma).
void resample_global(SamplerState& s, const Hyperparameters& hp) {
    {
        thread_local SplitMergeScratch scratch;
        SplitMerge moves(s, hp, scratch);
        for (int p = 0; p < kSplitMergeProposals; ++p) moves.propose();
    }
    compact(s);

    const std::size_t K = s.num_topics();
    s.table_counts.assign(K, 0);
    for (std::size_t j = 0; j < s.words.size(); ++j)
        for (std::size_t k = 0; k < K; ++k)
            if (s.doc_topic[j][k] > 0)
                s.table_counts[k] += antoniak_draw(s.rng, s.doc_topic[j][k], hp.alpha0 * s.global_weights[k]);
    std::vector<double> shape(K + 1);
    for (std::size_t k = 0; k < K; ++k) shape[k] = static_cast<double>(s.table_counts[k]);
    shape[K] = hp.gamma;
    s.global_weights = dirichlet_draw(s.rng, shape);
    for (double& b : s.global_weights) b = std::max(b, kMinWeight);
}

}  // namespace

void Hyperparameters::validate() const {
    if (!(gamma > 0.0) || !(alpha0 > 0.0) || !(eta > 0.0) || !std::isfinite(gamma) ||
        !std::isfinite(alpha0) || !std::isfinite(eta))
        throw ValidationError("hyperparameters gamma, alpha0 and eta must be positive and finite");
}

void FitOptions::validate() const {
    if (burn_in < 0) throw ValidationError("burn-in must be non-negative");
    if (sweeps <= burn_in) throw ValidationError("sweeps must exceed burn-in");
}

std::int64_t SamplerState::num_tokens() const {
    std::int64_t n = 0;
    for (const auto& d : words) n += static_cast<std::int64_t>(d.size());
    return n;
}

void SamplerState::check_consistency() const {
    const std::size_t K = num_topics();
    std::vector<std::int64_t> totals(K, 0);
    std::vector<std::vector<std::int64_t>> wt(vocab_size, std::vector<std::int64_t>(K, 0));
    for (std::size_t j = 0; j < words.size(); ++j) {
        std::vector<std::int64_t> dt(K, 0);
        for (std::size_t i = 0; i < words[j].size(); ++i) {
            const auto k = assignments[j][i];
            if (k < 0 || static_cast<std::size_t>(k) >= K)
                throw std::logic_error("assignment out of range");
            ++totals[k];
            ++dt[k];
            ++wt[words[j][i]][k];
        }
        for (std::size_t k = 0; k < K; ++k)
            if (dt[k] != doc_topic[j][k]) throw std::logic_error("doc-topic counts inconsistent");
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (totals[k] != topic_totals[k]) throw std::logic_error("topic totals inconsistent");
        if (totals[k] == 0) throw std::logic_error("empty topic after compaction");
    }
    for (std::size_t w = 0; w < vocab_size; ++w)
        for (std::size_t k = 0; k < K; ++k)
            if (wt[w][k] != word_topic[w][k]) throw std::logic_error("word-topic counts inconsistent");
    if (global_weights.size() != K + 1) throw std::logic_error("global weight size mismatch");
    double sum = 0.0;
    for (double b : global_weights) {
        if (!(b > 0.0)) throw std::logic_error("global weight not positive");
        sum += b;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::logic_error("global weights do not sum to one");
}

SamplerState init_state(std::span<const std::vector<std::uint32_t>> docs, std::size_t vocab_size,
                        const Hyperparameters& hp) {
    hp.validate();
    SamplerState s;
    s.vocab_size = vocab_size;
    s.words.assign(docs.begin(), docs.end());
    if (s.num_tokens() == 0) throw ValidationError("cannot fit an epoch without tokens");
    for (const auto& d : s.words)
        for (auto w : d)
            if (w >= vocab_size) throw ValidationError("token id outside the vocabulary");

    s.rng.seed(hp.seed);
    s.assignments.resize(s.words.size());
    s.doc_topic.assign(s.words.size(), {});
    s.word_topic.assign(vocab_size, {});
    s.global_weights = {1.0};

    // Tokens are seated in a random order over the whole corpus. Seating one
    // document at a time lets its first tokens drag the rest of it into the
    // same early topic, which tends to start the chain from one giant topic.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> order;
    for (std::size_t j = 0; j < s.words.size(); ++j) {
        s.assignments[j].assign(s.words[j].size(), -1);
        for (std::size_t i = 0; i < s.words[j].size(); ++i)
            order.emplace_back(static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i));
    }
    for (std::size_t t = order.size(); t > 1; --t)
        std::swap(order[t - 1], order[s.rng() % t]);
    std::vector<double> probs;
    for (const auto& [j, i] : order) seat_token(s, j, i, hp, probs);
    resample_global(s, hp);
    return s;
}

SamplerState init_state(std::span<const EncodedDocument> docs, std::size_t vocab_size,
                        const Hyperparameters& hp) {
    std::vector<std::vector<std::uint32_t>> words;
    words.reserve(docs.size());
    for (const auto& d : docs) words.push_back(d.tokens);
    return init_state(std::span<const std::vector<std::uint32_t>>(words), vocab_size, hp);
}

void gibbs_sweep(SamplerState& s, const Hyperparameters& hp) {
    std::vector<double> probs;
    probs.reserve(s.num_topics() + 8);
    for (std::size_t j = 0; j < s.words.size(); ++j) {
        for (std::size_t i = 0; i < s.words[j].size(); ++i) {
            remove_token(s, j, i);
            seat_token(s, j, i, hp, probs);
        }
    }
    compact(s);
    resample_global(s, hp);
}

double log_likelihood(const SamplerState& s, const Hyperparameters& hp) {
    const double v_eta = static_cast<double>(s.vocab_size) * hp.eta;
    const double lg_eta = std::lgamma(hp.eta);
    double ll = 0.0;
    for (auto n : s.topic_totals)
        ll += std::lgamma(v_eta) - std::lgamma(static_cast<double>(n) + v_eta);
    for (const auto& row : s.word_topic)
        for (auto n : row)
            if (n > 0) ll += std::lgamma(n + hp.eta) - lg_eta;
    for (const auto& row : s.doc_topic) {
        std::int64_t n_j = 0;
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (row[k] == 0) continue;
            const double a = hp.alpha0 * s.global_weights[k];
            ll += std::lgamma(a + row[k]) - std::lgamma(a);
            n_j += row[k];
        }
        ll += std::lgamma(hp.alpha0) - std::lgamma(hp.alpha0 + static_cast<double>(n_j));
    }
    return ll;
}

std::vector<double> smoothed_distribution(std::span<const std::int64_t> counts, double eta) {
    const double total =
        static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::int64_t{0})) +
        static_cast<double>(counts.size()) * eta;
    std::vector<double> phi(counts.size());
    if (total <= 0.0) {
        std::fill(phi.begin(), phi.end(), 1.0 / static_cast<double>(counts.size()));
        return phi;
    }
    for (std::size_t w = 0; w < counts.size(); ++w)
        phi[w] = (static_cast<double>(counts[w]) + eta) / total;
    return phi;
}

std::vector<Topic> estimate_topics(const SamplerState& s, const Hyperparameters& hp,
                                   int epoch_index) {
    const std::size_t K = s.num_topics();
    const double n_total = static_cast<double>(s.num_tokens());
    std::vector<Topic> topics(K);
    std::vector<std::int64_t> counts(s.vocab_size);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t w = 0; w < s.vocab_size; ++w) counts[w] = s.word_topic[w][k];
        topics[k].id = {epoch_index, static_cast<int>(k)};
        topics[k].phi = smoothed_distribution(counts, hp.eta);
        topics[k].popularity = static_cast<double>(s.topic_totals[k]) / n_total;
    }
    return topics;
}

namespace {

std::vector<std::vector<double>> doc_mixtures(const SamplerState& s, const Hyperparameters& hp) {
    const std::size_t K = s.num_topics();
    double live_mass = 0.0;
    for (std::size_t k = 0; k < K; ++k) live_mass += s.global_weights[k];
    std::vector<std::vector<double>> out(s.words.size(), std::vector<double>(K));
    for (std::size_t j = 0; j < s.words.size(); ++j) {
        const double denom = static_cast<double>(s.words[j].size()) + hp.alpha0 * live_mass;
        for (std::size_t k = 0; k < K; ++k)
            out[j][k] = (s.doc_topic[j][k] + hp.alpha0 * s.global_weights[k]) / denom;
    }
    return out;
}

}  // namespace

EpochModel fit_epoch(std::span<const EncodedDocument> docs, std::size_t vocab_size,
                     const Hyperparameters& hp, const FitOptions& options, Epoch epoch) {
    options.validate();
    SamplerState state = init_state(docs, vocab_size, hp);
    EpochModel model;
    model.epoch = std::move(epoch);
    model.num_documents = docs.size();
    model.loglik_trace.reserve(static_cast<std::size_t>(options.sweeps));
    for (int sweep = 0; sweep < options.sweeps; ++sweep) {
        gibbs_sweep(state, hp);
        model.loglik_trace.push_back(log_likelihood(state, hp));
    }
    model.topics = estimate_topics(state, hp, model.epoch.index);
    model.doc_mixtures = doc_mixtures(state, hp);
    return model;
}

FitAllResult fit_all_epochs(const std::vector<EncodedDocument>& docs,
                            const std::vector<Epoch>& epochs, std::size_t vocab_size,
                            const Hyperparameters& hp, const FitOptions& options, int jobs) {
    hp.validate();
    options.validate();
    FitAllResult result;
    std::vector<const Epoch*> todo;
    for (const auto& e : epochs) {
        if (e.doc_indices.empty())
            result.warnings.push_back("epoch " + std::to_string(e.index) + " [" +
                                      format_date(e.start) + ", " + format_date(e.end) +
                                      ") has no documents; skipped");
        else
            todo.push_back(&e);
    }
    if (todo.empty()) {
        result.warnings.push_back("no non-empty epochs to fit");
        return result;
    }

    result.models.resize(todo.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t t; (t = next.fetch_add(1)) < todo.size();) {
            try {
                const Epoch& e = *todo[t];
                std::vector<EncodedDocument> slice;
                slice.reserve(e.doc_indices.size());
                for (auto idx : e.doc_indices) slice.push_back(docs[idx]);
                Hyperparameters local = hp;
                local.seed = derive_seed(hp.seed, "fit", static_cast<std::uint64_t>(e.index));
                result.models[t] = fit_epoch(slice, vocab_size, local, options, e);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t n_threads =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, todo.size());
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return result;
}

}  // namespace topictrace
