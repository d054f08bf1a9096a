#include "doctest.h"

#include <cmath>
#include <optional>
#include <vector>

#include "ergolab/rokhlin.hpp"

using namespace ergolab;

namespace {

// pure-integer reimplementation over explicit bit windows; the oracle side
// of DP-vs-enumeration checks
int window_block_sum(std::uint32_t window, int k, int l, int n) {
    int sum = 0;
    for (int i = 0; i < k; ++i) sum += (window >> (i * n + l)) & 1u;
    return sum;
}

bool window_in_base(std::uint32_t window, int n, int k) {
    int b0 = window_block_sum(window, k, 0, n);
    for (int l = 1; l < n; ++l)
        if (b0 <= window_block_sum(window, k, l, n) + n) return false;
    return true;
}

Rational enumerate_base_measure(int n, int k, const Rational& p) {
    int bits = n * k;
    Rational q = Rational(1) - p;
    Rational total(0);
    for (std::uint32_t w = 0; w < (1u << bits); ++w) {
        if (!window_in_base(w, n, k)) continue;
        int ones = __builtin_popcount(w);
        total = total + p.pow(ones) * q.pow(bits - ones);
    }
    return total;
}

// searches the sampling stream for a point whose first coordinates match
// the requested bits
std::optional<Point> find_point_with_bits(const ActionDescriptor& action,
                                          const std::vector<int>& bits) {
    const auto& shift = action.as<BernoulliShiftDesc>();
    for (std::uint64_t i = 0; i < 2000000; ++i) {
        Point w = sample(action, 1357, i);
        bool ok = true;
        for (std::size_t pos = 0; pos < bits.size() && ok; ++pos)
            ok = coordinate_bit(shift, w.as<SymbolicPoint>(), static_cast<std::int64_t>(pos)) ==
                 bits[pos];
        if (ok) return w;
    }
    return std::nullopt;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("block sums and tower membership on crafted points") {
    TowerParams params;
    params.n = 2;
    params.k = 3;
    ActionDescriptor action = tower_shift_action(params);
    const auto& shift = action.as<BernoulliShiftDesc>();

    auto zeros = find_point_with_bits(action, {0, 0, 0, 0, 0, 0});
    REQUIRE(zeros.has_value());
    const auto& z = zeros->as<SymbolicPoint>();
    CHECK(block_sum(shift, z, 3, 0, 2) == 0);
    CHECK(block_sum(shift, z, 3, 1, 2) == 0);
    CHECK_FALSE(in_tower_base(shift, z, params));

    auto alternating = find_point_with_bits(action, {1, 0, 1, 0, 1, 0});
    REQUIRE(alternating.has_value());
    const auto& a = alternating->as<SymbolicPoint>();
    CHECK(block_sum(shift, a, 3, 0, 2) == 3);
    CHECK(block_sum(shift, a, 3, 1, 2) == 0);
    CHECK(in_tower_base(shift, a, params));  // 3 > 0 + 2
}

TEST_CASE("tower base disjointness is exhaustive for n=2, k=3") {
    // windows carry kn + (n-1) = 7 coordinates: membership of T^-j w for
    // j < n reads up to position kn - 1 + j
    const int n = 2, k = 3;
    for (std::uint32_t w = 0; w < (1u << 7); ++w) {
        bool base = window_in_base(w, n, k);
        for (int j = 1; j < n; ++j) {
            bool shifted = window_in_base(w >> j, n, k);
            CHECK_FALSE((base && shifted));
        }
    }
}

TEST_CASE("library membership agrees with the window oracle") {
    TowerParams params;
    params.n = 3;
    params.k = 2;
    ActionDescriptor action = tower_shift_action(params);
    const auto& shift = action.as<BernoulliShiftDesc>();
    for (std::uint64_t i = 0; i < 500; ++i) {
        Point w = sample(action, 99, i);
        std::uint32_t bits = 0;
        for (int pos = 0; pos < 6; ++pos)
            bits |= static_cast<std::uint32_t>(
                        coordinate_bit(shift, w.as<SymbolicPoint>(), pos))
                    << pos;
        CHECK(in_tower_base(shift, w.as<SymbolicPoint>(), params) ==
              window_in_base(bits, params.n, params.k));
    }
}

TEST_CASE("exact base measures: anchors") {
    TowerParams p21{2, 1, Rational(1, 2)};
    BaseMeasure m21 = base_measure_exact(p21);
    REQUIRE(m21.exact.has_value());
    CHECK(*m21.exact == Rational(0));

    TowerParams p23{2, 3, Rational(1, 2)};
    BaseMeasure m23 = base_measure_exact(p23);
    REQUIRE(m23.exact.has_value());
    CHECK(*m23.exact == Rational(1, 64));
    CHECK(enumerate_base_measure(2, 3, Rational(1, 2)) == Rational(1, 64));
}

TEST_CASE("DP equals enumeration for all k*n <= 20") {
    for (int n = 2; n <= 20; ++n)
        for (int k = 1; n * k <= 20; ++k) {
            TowerParams params{n, k, Rational(1, 2)};
            BaseMeasure dp = base_measure_exact(params);
            REQUIRE(dp.exact.has_value());
            CHECK(*dp.exact == enumerate_base_measure(n, k, Rational(1, 2)));
        }
    // a non-symmetric base exercises the DP the same way
    for (auto [n, k] : std::vector<std::pair<int, int>>{{2, 3}, {3, 2}, {2, 5}, {4, 3}}) {
        TowerParams params{n, k, Rational(1, 3)};
        BaseMeasure dp = base_measure_exact(params);
        REQUIRE(dp.exact.has_value());
        CHECK(*dp.exact == enumerate_base_measure(n, k, Rational(1, 3)));
    }
}

TEST_CASE("rational and floating routes agree") {
    for (auto [n, k] : std::vector<std::pair<int, int>>{{2, 10}, {4, 5}, {5, 4}}) {
        TowerParams params{n, k, Rational(1, 2)};
        BaseMeasure m = base_measure_exact(params);
        REQUIRE(m.exact.has_value());
        CHECK(std::abs(static_cast<double>(m.value) - m.exact->to_double()) < 1e-12);
    }
}

TEST_CASE("base measure converges to 1/n, cross-checked by a normal approximation") {
    TowerParams k200{2, 200, Rational(1, 2)};
    TowerParams k2000{2, 2000, Rational(1, 2)};
    double v200 = static_cast<double>(base_measure_exact(k200).value);
    double v2000 = static_cast<double>(base_measure_exact(k2000).value);
    CHECK(std::abs(v2000 - 0.5) < 0.05);
    CHECK(std::abs(v2000 - 0.5) < std::abs(v200 - 0.5));

    // P(B0 - B1 >= n+1) with B0 - B1 approx N(0, k/2), continuity corrected
    double sigma = std::sqrt(2000.0 / 2.0);
    double approx = 1.0 - normal_cdf((2.0 + 0.5) / sigma);
    CHECK(std::abs(v2000 - approx) < 0.005);
}

TEST_CASE("sampling agrees with the DP for a biased base") {
    TowerParams params{2, 4, Rational(1, 3)};
    BaseMeasure dp = base_measure_exact(params);
    REQUIRE(dp.exact.has_value());
    ActionDescriptor action = tower_shift_action(params);
    const auto& shift = action.as<BernoulliShiftDesc>();
    const std::int64_t n = 30000;
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        Point w = sample(action, 314, static_cast<std::uint64_t>(i));
        if (in_tower_base(shift, w.as<SymbolicPoint>(), params)) ++hits;
    }
    double emp = static_cast<double>(hits) / static_cast<double>(n);
    double exact = dp.exact->to_double();
    double se = std::sqrt(exact * (1 - exact) / static_cast<double>(n));
    CHECK(std::abs(emp - exact) < 4 * se);
}

TEST_CASE("DP budget") {
    TowerParams big{2, 10000001, Rational(1, 2)};
    CHECK_THROWS_AS(base_measure_exact(big), BudgetExceeded);
}

TEST_CASE("tower certificate at n=3, k=50") {
    TowerParams params{3, 50, Rational(1, 2)};
    const std::int64_t n_samples = 20000;
    TowerReport report = tower_certificate(params, n_samples, ball(GroupFamily::Z, 1), 7);

    CHECK(report.disjointness_violations == 0);

    double exact = static_cast<double>(report.exact_base_measure.value);
    double se = std::sqrt(exact * (1 - exact) / static_cast<double>(n_samples));
    CHECK(std::abs(report.empirical_base_measure - exact) < 4 * se);

    // T X_0 = X_1: entry (gamma=+1, i=0, j=1) counts the same indicator as
    // the marginal of X_1 (identity entry at (1,1)); S order is {0,-1,+1}
    const StatsMatrix& src = report.certificate.source;
    CHECK(src.at(2, 0, 1) == src.at(0, 1, 1));
}
