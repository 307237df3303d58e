#include "topictrace/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "topictrace/errors.hpp"

namespace topictrace {

namespace {

void check_lengths(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw ValidationError("similarity: distributions have different lengths (" +
                              std::to_string(p.size()) + " vs " + std::to_string(q.size()) + ")");
}

}  // namespace

std::string_view to_string(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::Hellinger: return "hellinger";
        case MeasureKind::Bhattacharyya: return "bhattacharyya";
        case MeasureKind::QuasiJaccard: return "quasi-jaccard";
    }
    return "unknown";
}

std::optional<MeasureKind> parse_measure(std::string_view name) {
    if (name == "hellinger") return MeasureKind::Hellinger;
    if (name == "bhattacharyya") return MeasureKind::Bhattacharyya;
    if (name == "quasi-jaccard" || name == "quasi_jaccard" || name == "jaccard")
        return MeasureKind::QuasiJaccard;
    return std::nullopt;
}

double hellinger(std::span<const double> p, std::span<const double> q) {
    check_lengths(p, q);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = std::sqrt(std::max(p[i], 0.0)) - std::sqrt(std::max(q[i], 0.0));
        sum += d * d;
    }
    return std::min(1.0, std::sqrt(std::max(sum, 0.0)) / std::sqrt(2.0));
}

double bhattacharyya(std::span<const double> p, std::span<const double> q) {
    check_lengths(p, q);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::sqrt(std::max(p[i] * q[i], 0.0));
    return std::clamp(sum, 0.0, 1.0);
}

double quasi_jaccard(std::span<const double> p, std::span<const double> q) {
    check_lengths(p, q);
    double pq = 0.0, pp = 0.0, qq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        pq += p[i] * q[i];
        pp += p[i] * p[i];
        qq += q[i] * q[i];
    }
    const double denom = pp + qq - pq;
    if (denom <= 0.0) return 0.0;
    return std::clamp(pq / denom, 0.0, 1.0);
}

double measure(MeasureKind kind, std::span<const double> p, std::span<const double> q) {
    switch (kind) {
        case MeasureKind::Hellinger: return hellinger(p, q);
        case MeasureKind::Bhattacharyya: return bhattacharyya(p, q);
        case MeasureKind::QuasiJaccard: return quasi_jaccard(p, q);
    }
    return 0.0;
}

double to_similarity(MeasureKind kind, double value) {
    return kind == MeasureKind::Hellinger ? 1.0 - value : value;
}

void validate_zeta(double zeta) {
    if (!(zeta >= 0.0 && zeta <= 1.0))
        throw ValidationError("operating point zeta must lie in [0, 1]");
}

EmpiricalCDF::EmpiricalCDF(std::vector<double> values) : sorted_(std::move(values)) {
    if (sorted_.empty()) throw ValidationError("empirical CDF needs at least one value");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCDF::operator()(double x) const {
    const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

double EmpiricalCDF::threshold_at(double zeta) const {
    validate_zeta(zeta);
    // F(sorted_[i]) >= (i + 1) / n, so the answer sits at index ceil(zeta n) - 1
    const double n = static_cast<double>(sorted_.size());
    const double rank = std::ceil(zeta * n - 1e-9);
    const auto idx = static_cast<std::size_t>(std::clamp(rank - 1.0, 0.0, n - 1.0));
    return sorted_[idx];
}

}  // namespace topictrace
