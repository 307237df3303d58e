#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "topictrace/errors.hpp"
#include "topictrace/random.hpp"
#include "topictrace/similarity.hpp"

using namespace topictrace;
using V = std::vector<double>;

TEST_CASE("hellinger examples") {
    CHECK(hellinger(V{0.3, 0.7}, V{0.3, 0.7}) == doctest::Approx(0.0));
    CHECK(hellinger(V{1, 0}, V{0, 1}) == doctest::Approx(1.0));
    CHECK(hellinger(V{0.5, 0.5}, V{1, 0}) == doctest::Approx(std::sqrt(1.0 - std::sqrt(0.5))).epsilon(1e-12));
    CHECK(hellinger(V{0.5, 0.5}, V{1, 0}) == doctest::Approx(0.541196).epsilon(1e-6));
}

TEST_CASE("bhattacharyya examples") {
    CHECK(bhattacharyya(V{0.2, 0.8}, V{0.2, 0.8}) == doctest::Approx(1.0));
    CHECK(bhattacharyya(V{1, 0}, V{0, 1}) == 0.0);
    CHECK(bhattacharyya(V{0.5, 0.5}, V{1, 0}) == doctest::Approx(0.707107).epsilon(1e-6));
}

TEST_CASE("quasi-jaccard examples") {
    CHECK(quasi_jaccard(V{0.2, 0.8}, V{0.2, 0.8}) == doctest::Approx(1.0));
    CHECK(quasi_jaccard(V{1, 0}, V{0, 1}) == 0.0);
    CHECK(quasi_jaccard(V{0.5, 0.5}, V{1, 0}) == doctest::Approx(0.5));
    CHECK(quasi_jaccard(V{0.5, 0.5, 0}, V{0, 0.5, 0.5}) == doctest::Approx(1.0 / 3.0));
    CHECK(quasi_jaccard(V{0.6, 0.4}, V{0.2, 0.8}) == doctest::Approx(0.44 / (0.52 + 0.68 - 0.44)));
}

TEST_CASE("orientation") {
    CHECK(to_similarity(MeasureKind::Hellinger, 0.0) == 1.0);
    CHECK(to_similarity(MeasureKind::Bhattacharyya, 0.7) == 0.7);
    CHECK(to_similarity(MeasureKind::QuasiJaccard, 0.3) == 0.3);
    CHECK(to_similarity(MeasureKind::Hellinger, 0.541196) == doctest::Approx(0.458804));
    CHECK(similarity(MeasureKind::Hellinger, V{0.5, 0.5}, V{1, 0}) == doctest::Approx(0.458804).epsilon(1e-6));
}

TEST_CASE("measure names round trip") {
    for (auto k : {MeasureKind::Hellinger, MeasureKind::Bhattacharyya, MeasureKind::QuasiJaccard})
        CHECK(parse_measure(to_string(k)) == k);
    CHECK_FALSE(parse_measure("cosine").has_value());
}

TEST_CASE("length mismatch is rejected") {
    CHECK_THROWS_AS(hellinger(V{1.0}, V{0.5, 0.5}), ValidationError);
    CHECK_THROWS_AS(bhattacharyya(V{1.0}, V{0.5, 0.5}), ValidationError);
    CHECK_THROWS_AS(quasi_jaccard(V{1.0}, V{0.5, 0.5}), ValidationError);
}

TEST_CASE("identity, symmetry and range over random simplex points") {
    Rng rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 2 + rng() % 60;
        const double conc = trial % 3 == 0 ? 0.05 : 1.0;
        const auto p = dirichlet_draw(rng, n, conc);
        const auto q = dirichlet_draw(rng, n, conc);
        for (auto k : {MeasureKind::Hellinger, MeasureKind::Bhattacharyya, MeasureKind::QuasiJaccard}) {
            const double pq = measure(k, p, q);
            CHECK(pq == measure(k, q, p));
            CHECK(pq >= 0.0);
            CHECK(pq <= 1.0);
            const double s = similarity(k, p, q);
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
            CHECK(similarity(k, p, p) == doctest::Approx(1.0).epsilon(1e-12));
        }
        const double h = hellinger(p, q);
        CHECK(std::abs(h * h - (1.0 - bhattacharyya(p, q))) < 1e-12);
    }
}

TEST_CASE("empirical cdf") {
    const auto cdf = empirical_cdf({0.9, 0.1, 0.5});
    CHECK(cdf(0.5) == doctest::Approx(2.0 / 3.0));
    CHECK(cdf(0.1 - 1e-9) == 0.0);
    CHECK(cdf(0.9) == 1.0);
    CHECK(cdf.size() == 3);
    CHECK(std::is_sorted(cdf.sorted_values().begin(), cdf.sorted_values().end()));
    CHECK_THROWS_AS(empirical_cdf({}), ValidationError);
}

TEST_CASE("empirical cdf of uniform samples stays within the DKW band") {
    Rng rng(2024);
    std::vector<double> xs(1000);
    for (auto& x : xs) x = uniform01(rng);
    const auto cdf = empirical_cdf(xs);
    double worst = 0.0;
    const auto sorted = cdf.sorted_values();
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        // sup is attained at the sample points, from either side
        worst = std::max(worst, std::abs(cdf(sorted[i]) - sorted[i]));
        worst = std::max(worst, std::abs(static_cast<double>(i) / 1000.0 - sorted[i]));
    }
    CHECK(worst < 0.06);
}

TEST_CASE("threshold_at uses the lower quantile") {
    V values;
    for (int i = 1; i <= 10; ++i) values.push_back(i / 10.0);
    const auto cdf = empirical_cdf(values);
    CHECK(cdf.threshold_at(0.95) == doctest::Approx(1.0));
    CHECK(cdf.threshold_at(0.0) == doctest::Approx(0.1));
    CHECK(cdf.threshold_at(0.5) == doctest::Approx(0.5));
    CHECK(cdf.threshold_at(1.0) == doctest::Approx(1.0));
    CHECK(cdf.threshold_at(0.9) == doctest::Approx(0.9));
    // smallest stored value reaching zeta, for every zeta on a fine grid
    for (int z = 0; z <= 1000; ++z) {
        const double zeta = z / 1000.0;
        const double t = cdf.threshold_at(zeta);
        CHECK(cdf(t) >= zeta - 1e-12);
        for (double v : cdf.sorted_values())
            if (v < t) CHECK(cdf(v) < zeta);
    }
}

TEST_CASE("threshold is monotone in zeta") {
    Rng rng(8);
    V values(257);
    for (auto& v : values) v = uniform01(rng);
    const auto cdf = empirical_cdf(values);
    double prev = -1.0;
    for (int z = 0; z <= 100; ++z) {
        const double t = cdf.threshold_at(z / 100.0);
        CHECK(t >= prev);
        prev = t;
    }
}

TEST_CASE("zeta validation") {
    CHECK_NOTHROW(validate_zeta(0.0));
    CHECK_NOTHROW(validate_zeta(1.0));
    CHECK_THROWS_AS(validate_zeta(-0.01), ValidationError);
    CHECK_THROWS_AS(validate_zeta(1.01), ValidationError);
    CHECK_THROWS_AS(validate_zeta(std::nan("")), ValidationError);
}
