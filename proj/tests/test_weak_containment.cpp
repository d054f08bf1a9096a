#include "doctest.h"

#include <cmath>
#include <functional>
#include <vector>

#include "ergolab/weak_containment.hpp"

using namespace ergolab;

namespace {

ActionDescriptor golden_rotation() { return ActionDescriptor::rotation(golden_alpha()); }

ActionDescriptor fair_shift() {
    return ActionDescriptor::bernoulli_shift(GroupFamily::Z, Distribution({0.5, 0.5}));
}

}  // namespace

TEST_CASE("stats matrix exact cases") {
    auto rot = golden_rotation();
    auto S = ball(GroupFamily::Z, 1);
    StatsMatrix full = stats_matrix(rot, {TestSet::full()}, S, 2000, 3);
    StatsMatrix none = stats_matrix(rot, {TestSet::empty()}, S, 2000, 3);
    for (std::size_t g = 0; g < S.size(); ++g) {
        CHECK(full.at(g, 0, 0) == 1.0);
        CHECK(none.at(g, 0, 0) == 0.0);
    }
}

TEST_CASE("rotation interval overlap matches the analytic value") {
    auto rot = ActionDescriptor::rotation(0.3);
    FiniteSubset S(std::vector<GroupElement>{GroupElement::z(1)});
    const std::int64_t n = 100000;
    StatsMatrix emp = stats_matrix(rot, {TestSet::interval(0.0, 0.5)}, S, n, 17);
    // f_1[0,0.5) = [0.3,0.8); overlap with [0,0.5) has measure 0.2
    double se = std::sqrt(0.2 * 0.8 / static_cast<double>(n));
    CHECK(std::abs(emp.at(0, 0, 0) - 0.2) < 4 * se);

    StatsMatrix exact = exact_rotation_stats(0.3, {IntervalSet::interval(0.0, 0.5)}, S);
    CHECK(exact.at(0, 0, 0) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("measure preservation symmetry of entries") {
    // mu(f_g X_i cap X_j) = mu(X_i cap f_{g^-1} X_j), so entry(g,i,j) and
    // entry(g^-1,j,i) estimate the same quantity
    auto rot = golden_rotation();
    std::vector<TestSet> sets{TestSet::interval(0.0, 0.25), TestSet::interval(0.55, 0.9)};
    auto S = ball(GroupFamily::Z, 2);
    const std::int64_t n = 50000;
    StatsMatrix m = stats_matrix(rot, sets, S, n, 19);
    for (std::size_t g = 0; g < S.size(); ++g) {
        // locate g^-1 in S
        GroupElement inv = invert(S[g]);
        std::size_t gi = 0;
        while (!(S[gi] == inv)) ++gi;
        for (std::size_t i = 0; i < sets.size(); ++i)
            for (std::size_t j = 0; j < sets.size(); ++j) {
                double joint_se = m.se(g, i, j) + m.se(gi, j, i) + 1e-9;
                CHECK(std::abs(m.at(g, i, j) - m.at(gi, j, i)) < 4 * joint_se);
            }
    }
    // and exactly, in closed form
    std::vector<IntervalSet> exact_sets{IntervalSet::interval(0.0, 0.25),
                                        IntervalSet::interval(0.55, 0.9)};
    StatsMatrix exact = exact_rotation_stats(golden_alpha(), exact_sets, S);
    for (std::size_t g = 0; g < S.size(); ++g) {
        GroupElement inv = invert(S[g]);
        std::size_t gi = 0;
        while (!(S[gi] == inv)) ++gi;
        for (std::size_t i = 0; i < exact_sets.size(); ++i)
            for (std::size_t j = 0; j < exact_sets.size(); ++j)
                CHECK(exact.at(g, i, j) == doctest::Approx(exact.at(gi, j, i)).epsilon(1e-10));
    }
}

TEST_CASE("row sums over a partition family recover marginals") {
    auto rot = golden_rotation();
    std::vector<TestSet> quarters;
    for (int i = 0; i < 4; ++i) quarters.push_back(TestSet::interval(i / 4.0, (i + 1) / 4.0));
    auto S = ball(GroupFamily::Z, 1);
    StatsMatrix m = stats_matrix(rot, quarters, S, 20000, 23);
    // canonical order puts the identity first in S
    for (std::size_t g = 0; g < S.size(); ++g)
        for (std::size_t j = 0; j < 4; ++j) {
            double row_sum = 0.0;
            for (std::size_t i = 0; i < 4; ++i) row_sum += m.at(g, i, j);
            CHECK(row_sum == doctest::Approx(m.at(0, j, j)).epsilon(1e-12));
        }
}

TEST_CASE("test sets from partition cells and cylinders") {
    auto rot = golden_rotation();
    Partition part = circle_partition(rot, 8);
    TestSet cells = TestSet::partition_cells(part, {0, 3});  // [0,1/8) u [3/8,4/8)
    for (std::uint64_t i = 0; i < 500; ++i) {
        Point x = sample(rot, 63, i);
        double v = x.as<CirclePoint>().x;
        bool expect = (v < 0.125) || (v >= 0.375 && v < 0.5);
        CHECK(member(rot, cells, x) == expect);
    }

    auto shift = fair_shift();
    const auto& desc = shift.as<BernoulliShiftDesc>();
    FiniteSubset window = ball(GroupFamily::Z, 1);
    // patterns whose symbol at the identity is 2; the identity is the first
    // window element in canonical order, so it is the low mixed-radix digit
    std::vector<std::int64_t> allowed;
    for (std::int64_t code = 0; code < 8; ++code)
        if (code % 2 == 1) allowed.push_back(code);
    TestSet cyl = TestSet::cylinder(window, 2, allowed);
    for (std::uint64_t i = 0; i < 500; ++i) {
        Point w = sample(shift, 64, i);
        bool expect =
            symbolic_coordinate(desc, w.as<SymbolicPoint>(), GroupElement::z(0)) == 2;
        CHECK(member(shift, cyl, w) == expect);
    }

    // boolean algebra wrappers agree with pointwise logic
    TestSet combo = TestSet::union_of(
        {TestSet::complement(cells), TestSet::intersection_of({cells, TestSet::empty()})});
    for (std::uint64_t i = 0; i < 200; ++i) {
        Point x = sample(rot, 65, i);
        CHECK(member(rot, combo, x) == !member(rot, cells, x));
    }
}

TEST_CASE("containment certificates") {
    auto S = ball(GroupFamily::Z, 1);
    StatsMatrix a = cyclic_action_table(3, S);
    ContainmentCertificate same = check_containment(a, a, 0.01);
    CHECK(same.max_deviation == 0.0);
    CHECK(same.pass);

    StatsMatrix b = a;
    b.entries[0] += 0.1;
    ContainmentCertificate off = check_containment(b, a, 0.05);
    CHECK_FALSE(off.pass);
    CHECK(off.max_deviation == doctest::Approx(0.1));
    // enlarging epsilon never flips pass -> fail
    CHECK(check_containment(b, a, 0.2).pass);

    StatsMatrix c = cyclic_action_table(4, S);
    CHECK_THROWS_AS(check_containment(a, c, 0.1), ShapeMismatch);
}

TEST_CASE("cyclic table shape") {
    // S in canonical order: {0, -1, +1}
    auto S = ball(GroupFamily::Z, 1);
    StatsMatrix t = cyclic_action_table(4, S);
    // gamma = +1 maps Y_i onto Y_{i+1}
    CHECK(t.at(2, 0, 1) == doctest::Approx(0.25));
    CHECK(t.at(2, 3, 0) == doctest::Approx(0.25));
    CHECK(t.at(2, 0, 2) == 0.0);
    // identity: diagonal
    CHECK(t.at(0, 2, 2) == doctest::Approx(0.25));
}

TEST_CASE("pushforward marginal") {
    auto shift = fair_shift();
    FiniteSubset T = ball(GroupFamily::Z, 1);
    const std::int64_t n = 20000;

    // identity labeling: the pushforward is the product measure
    SymbolMap coord = coordinate_map(shift);
    PatternStats marg = pushforward_marginal(shift, coord, T, n, 41);
    for (double p : marg.empirical) {
        double se = std::sqrt(0.125 * 0.875 / static_cast<double>(n));
        CHECK(std::abs(p - 0.125) < 4 * se);
    }

    // constant labeling: point mass on the constant pattern
    PatternStats point = pushforward_marginal(shift, constant_map(2, 2), T, 500, 41);
    CHECK(point.empirical.back() == 1.0);
    for (std::size_t c = 0; c + 1 < point.empirical.size(); ++c) CHECK(point.empirical[c] == 0.0);

    // same estimator as estimate_pattern_measures: identical counts at the
    // same seed
    PatternStats direct = estimate_pattern_measures(shift, coord, T, n, 41);
    CHECK(direct.counts == marg.counts);
}

TEST_CASE("discretize_map basics") {
    auto obs = [](const Point& p) { return p.as<CirclePoint>().x; };
    SymbolMap one = discretize_map(obs, 1);
    Point x(Point::Variant{CirclePoint{0.73}});
    CHECK(one.eval(x) == 1);
    CHECK(discretize_level(1, 1) == doctest::Approx(0.5));
    CHECK(std::abs(discretize_level(1, one.eval(x)) - 0.73) <= 0.5);

    // a map already on k <= n levels is reproduced up to level snapping
    SymbolMap eight = discretize_map(obs, 8);
    for (int j = 1; j <= 8; ++j) {
        Point level_point(Point::Variant{CirclePoint{discretize_level(8, j)}});
        CHECK(eight.eval(level_point) == j);
    }

    // sup |phi - phi_n| <= 1/(2n) on samples
    auto rot = golden_rotation();
    for (int levels : {2, 5, 16}) {
        SymbolMap phi_n = discretize_map(obs, levels);
        for (std::uint64_t i = 0; i < 500; ++i) {
            Point p = sample(rot, 55, i);
            double err = std::abs(discretize_level(levels, phi_n.eval(p)) - obs(p));
            CHECK(err <= 0.5 / levels + 1e-12);
        }
    }
}

TEST_CASE("discretized pushforward means converge to the reference") {
    // per-window-element means of phi_n against the n=64 reference, same
    // samples: deviation bounded by 1/(2n) + 1/128 and shrinking as n doubles
    auto rot = golden_rotation();
    auto obs = [](const Point& p) { return p.as<CirclePoint>().x; };
    FiniteSubset T = ball(GroupFamily::Z, 1);
    const std::int64_t n_samples = 4000;

    auto window_means = [&](int levels) {
        SymbolMap phi = discretize_map(obs, levels);
        std::vector<double> means(T.size(), 0.0);
        for (std::int64_t i = 0; i < n_samples; ++i) {
            Point x = sample(rot, 66, static_cast<std::uint64_t>(i));
            for (std::size_t k = 0; k < T.size(); ++k)
                means[k] += discretize_level(levels, phi.eval(apply(rot, T[k], x)));
        }
        for (auto& m : means) m /= static_cast<double>(n_samples);
        return means;
    };

    std::vector<double> reference = window_means(64);
    double prev_bound = 1.0;
    for (int levels : {4, 8, 16, 32}) {
        std::vector<double> means = window_means(levels);
        double bound = 0.5 / levels + 0.5 / 64 + 1e-12;
        for (std::size_t k = 0; k < T.size(); ++k)
            CHECK(std::abs(means[k] - reference[k]) <= bound);
        CHECK(bound <= prev_bound);
        prev_bound = bound;
    }
}
