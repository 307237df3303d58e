#pragma once

// Exact collapsed HDP posterior over token partitions, by enumeration.
// Only for tiny corpora (a handful of tokens); test use only.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace oracle {

struct Prior {
    double gamma;
    double alpha0;
    double eta;
};

// Restricted-growth label string of an assignment, tokens taken in document
// order ("0010" = tokens 0, 1, 3 share a topic).
std::string canonical_partition(const std::vector<std::vector<std::int32_t>>& assignments);

// Posterior probability of every partition of the corpus tokens into topics.
std::map<std::string, double> hdp_partition_posterior(const std::vector<std::vector<std::uint32_t>>& docs,
                                                      std::size_t vocab_size, const Prior& prior);

double total_variation(const std::map<std::string, double>& p, const std::map<std::string, double>& q);

}  // namespace oracle
