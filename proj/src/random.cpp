#include "topictrace/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace topictrace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view stage, std::uint64_t index) {
    // FNV-1a over the stage name
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : stage) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(root) ^ h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double uniform01(Rng& rng) {
    // 53 random bits -> [0, 1)
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace {

// Marsaglia-Tsang for shape >= 1.
double gamma_draw_large(Rng& rng, double shape) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal(rng);
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = uniform01(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

}  // namespace

double log_gamma_draw(Rng& rng, double shape) {
    if (shape >= 1.0) return std::log(gamma_draw_large(rng, shape));
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    double u = uniform01(rng);
    while (u == 0.0) u = uniform01(rng);
    return std::log(gamma_draw_large(rng, shape + 1.0)) + std::log(u) / shape;
}

std::vector<double> dirichlet_draw(Rng& rng, std::span<const double> alpha) {
    std::vector<double> out(alpha.size());
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        out[i] = log_gamma_draw(rng, alpha[i]);
        max_log = std::max(max_log, out[i]);
    }
    double total = 0.0;
    for (double& v : out) {
        v = std::exp(v - max_log);
        total += v;
    }
    for (double& v : out) v /= total;
    return out;
}

std::vector<double> dirichlet_draw(Rng& rng, std::size_t n, double alpha) {
    std::vector<double> a(n, alpha);
    return dirichlet_draw(rng, a);
}

std::size_t sample_discrete(Rng& rng, std::span<const double> weights, double total) {
    double u = uniform01(rng) * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        u -= weights[i];
        if (u < 0.0) return i;
    }
    // rounding: fall back to the last index with positive weight
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0.0) return i;
    return weights.size() - 1;
}

}  // namespace topictrace
