#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace topictrace {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Per-stage seed: a fixed hash of (root seed, stage name, index).
std::uint64_t derive_seed(std::uint64_t root, std::string_view stage, std::uint64_t index);

double uniform01(Rng& rng);

// Log of a Gamma(shape, 1) draw. Stable for very small shapes, where the
// plain draw underflows to zero.
double log_gamma_draw(Rng& rng, double shape);

// Symmetric or asymmetric Dirichlet draw; output sums to 1.
std::vector<double> dirichlet_draw(Rng& rng, std::span<const double> alpha);
std::vector<double> dirichlet_draw(Rng& rng, std::size_t n, double alpha);

// Index drawn proportionally to non-negative weights; `total` is their sum.
std::size_t sample_discrete(Rng& rng, std::span<const double> weights, double total);

}  // namespace topictrace
