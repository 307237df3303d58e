#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace topictrace {

enum class MeasureKind { Hellinger, Bhattacharyya, QuasiJaccard };

std::string_view to_string(MeasureKind kind);
std::optional<MeasureKind> parse_measure(std::string_view name);

// Distance in [0, 1]: 0 iff p == q, 1 iff disjoint supports.
double hellinger(std::span<const double> p, std::span<const double> q);
// Coefficient in [0, 1]: 1 iff p == q.
double bhattacharyya(std::span<const double> p, std::span<const double> q);
// sum(p q) / (sum(p^2) + sum(q^2) - sum(p q)).
double quasi_jaccard(std::span<const double> p, std::span<const double> q);

double measure(MeasureKind kind, std::span<const double> p, std::span<const double> q);

// Orients every measure so that larger means more similar (Hellinger -> 1 - H).
double to_similarity(MeasureKind kind, double value);

inline double similarity(MeasureKind kind, std::span<const double> p, std::span<const double> q) {
    return to_similarity(kind, measure(kind, p, q));
}

class EmpiricalCDF {
public:
    // Throws ValidationError when values is empty.
    explicit EmpiricalCDF(std::vector<double> values);

    // Fraction of stored values <= x.
    double operator()(double x) const;

    // Lower empirical quantile: the smallest stored v with F(v) >= zeta.
    double threshold_at(double zeta) const;

    std::span<const double> sorted_values() const { return sorted_; }
    std::size_t size() const { return sorted_.size(); }

private:
    std::vector<double> sorted_;
};

inline EmpiricalCDF empirical_cdf(std::vector<double> values) {
    return EmpiricalCDF(std::move(values));
}

// Throws ValidationError unless 0 <= zeta <= 1.
void validate_zeta(double zeta);

}  // namespace topictrace
