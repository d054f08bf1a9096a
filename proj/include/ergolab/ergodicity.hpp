#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/action.hpp"
#include "ergolab/test_set.hpp"
#include "ergolab/weak_containment.hpp"

namespace ergolab {

// Denominators q_1, q_2, ... of the continued fraction convergents of
// alpha in (0,1). For the golden rotation these are 1, 2, 3, 5, 8, 13, ...
inline std::vector<std::int64_t> continued_fraction_denominators(double alpha, int max_m) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
    if (max_m > 30) throw ConfigError("continued fraction depth capped at 30");
    std::vector<std::int64_t> qs;
    double x = alpha;
    std::int64_t q_prev = 0, q_cur = 1;
    for (int i = 0; i < max_m; ++i) {
        x = 1.0 / x;
        auto a = static_cast<std::int64_t>(std::floor(x));
        if (a < 1 || a > (std::int64_t(1) << 40)) break;  // double precision exhausted
        std::int64_t q_next = a * q_cur + q_prev;
        qs.push_back(q_next);
        q_prev = q_cur;
        q_cur = q_next;
        x -= static_cast<double>(a);
        if (x < 1e-15) break;
    }
    return qs;
}

// A_m = {x : frac(q_m x) < 1/2}: q_m arcs of length 1/(2 q_m), measure
// exactly 1/2, with mu(f_1 A_m symdiff A_m) = 2 ||q_m alpha||.
inline TestSet rotation_almost_invariant_set(std::int64_t q) {
    std::vector<IntervalSet::Arc> arcs;
    arcs.reserve(static_cast<std::size_t>(q));
    double dq = static_cast<double>(q);
    for (std::int64_t j = 0; j < q; ++j)
        arcs.push_back({static_cast<double>(j) / dq,
                        (static_cast<double>(2 * j + 1)) / (2.0 * dq)});
    return TestSet::arcs(IntervalSet::from_arcs(std::move(arcs)));
}

// The m-th set of the almost invariant sequence for the rotation by alpha.
inline TestSet rotation_almost_invariant(double alpha, int m, std::int64_t* q_out = nullptr) {
    auto qs = continued_fraction_denominators(alpha, m);
    if (static_cast<int>(qs.size()) < m)
        throw ConfigError("continued fraction of alpha exhausted before m");
    std::int64_t q = qs[static_cast<std::size_t>(m) - 1];
    if (q_out) *q_out = q;
    return rotation_almost_invariant_set(q);
}

struct AlmostInvariantSet {
    TestSet set;
    double measure = 0.0;  // empirical
    std::vector<std::pair<GroupElement, double>> defect;
    double max_defect = 0.0;
    std::int64_t n_samples = 0;
};

// Empirical mu(f_g A symdiff A) per g in S, via indicator disagreement
// between x in A and f_{g^-1} x in A.
inline AlmostInvariantSet invariance_defect(const ActionDescriptor& action, const TestSet& A,
                                            const FiniteSubset& S, std::int64_t n_samples,
                                            std::uint64_t rng_seed) {
    AlmostInvariantSet out;
    out.set = A;
    out.n_samples = n_samples;
    std::vector<std::int64_t> disagreements(S.size(), 0);
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < n_samples; ++i) {
        Point x = sample(action, rng_seed, static_cast<std::uint64_t>(i));
        bool in_a = member(action, A, x);
        if (in_a) ++hits;
        for (std::size_t g = 0; g < S.size(); ++g) {
            bool in_ga = member(action, A, apply(action, invert(S[g]), x));
            if (in_a != in_ga) ++disagreements[g];
        }
    }
    out.measure = static_cast<double>(hits) / static_cast<double>(n_samples);
    for (std::size_t g = 0; g < S.size(); ++g) {
        double d = static_cast<double>(disagreements[g]) / static_cast<double>(n_samples);
        out.defect.push_back({S[g], d});
        out.max_defect = std::max(out.max_defect, d);
    }
    return out;
}

struct ConditionalMeasureRow {
    int m = 0;
    std::int64_t q = 0;
    double measure_A = 0.0;     // empirical mu(A_m)
    double measure_C = 0.0;     // empirical mu(C)
    double joint = 0.0;         // empirical mu(C cap A_m)
    double defect_gamma1 = 0.0; // empirical mu(f_1 A_m symdiff A_m)
    double target = 0.0;        // mu(C) * 1/2
    double deviation = 0.0;     // |joint - target|
};

// Checks mu(C cap A_m) -> mu(C)/2 along the rotation's almost invariant
// sequence; lambda = 1/2 by construction.
inline std::vector<ConditionalMeasureRow> conditional_measure_check(
    const ActionDescriptor& action, const std::vector<int>& ms, const TestSet& C,
    std::int64_t n_samples, std::uint64_t rng_seed) {
    if (!action.is<RotationDesc>())
        throw NoAlmostInvariantSetAvailable(
            "almost invariant sequence construction requires a rotation");
    double alpha = action.as<RotationDesc>().alpha;
    GroupElement one = GroupElement::z(1);
    std::vector<ConditionalMeasureRow> rows;
    for (int m : ms) {
        ConditionalMeasureRow row;
        row.m = m;
        TestSet A = rotation_almost_invariant(alpha, m, &row.q);
        std::int64_t in_c = 0, in_a = 0, joint = 0, defect = 0;
        for (std::int64_t i = 0; i < n_samples; ++i) {
            Point x = sample(action, rng_seed, static_cast<std::uint64_t>(i));
            bool c = member(action, C, x);
            bool a = member(action, A, x);
            bool ga = member(action, A, apply(action, invert(one), x));
            in_c += c;
            in_a += a;
            joint += (c && a);
            defect += (a != ga);
        }
        auto n = static_cast<double>(n_samples);
        row.measure_A = static_cast<double>(in_a) / n;
        row.measure_C = static_cast<double>(in_c) / n;
        row.joint = static_cast<double>(joint) / n;
        row.defect_gamma1 = static_cast<double>(defect) / n;
        row.target = row.measure_C / 2.0;
        row.deviation = std::abs(row.joint - row.target);
        rows.push_back(row);
    }
    return rows;
}

// X_i = (A cap Y'_i) union (A^c cap Y''_i).
inline std::vector<TestSet> blend_sets(const TestSet& A, const std::vector<TestSet>& y_prime,
                                       const std::vector<TestSet>& y_second) {
    if (y_prime.size() != y_second.size())
        throw ShapeMismatch("blend needs |Y'| == |Y''|");
    TestSet a_c = TestSet::complement(A);
    std::vector<TestSet> out;
    out.reserve(y_prime.size());
    for (std::size_t i = 0; i < y_prime.size(); ++i)
        out.push_back(TestSet::union_of({TestSet::intersection_of({A, y_prime[i]}),
                                         TestSet::intersection_of({a_c, y_second[i]})}));
    return out;
}

struct BlendLevel {
    int m_index = 0;        // continued-fraction index used
    std::int64_t q = 0;
    double defect_bound = 0.0;     // 2 ||q alpha||, the closed form
    double empirical_defect = 0.0; // max over S
    double empirical_measure = 0.0;
};

struct BlendCertificate {
    int iterations = 0;  // m: target is f x b_{2^m}
    std::vector<BlendLevel> levels;
    ContainmentCertificate certificate;
};

// Quarter-arc target sets on (circle x atoms): set i has slice
// Q_{(i+t) mod 4} at atom t, where Q_j = [j/4, (j+1)/4).
inline std::vector<TestSet> quarter_arc_blend_targets(int atoms) {
    std::vector<TestSet> out;
    for (int i = 0; i < 4; ++i) {
        std::vector<TestSet> pieces;
        for (int t = 0; t < atoms; ++t) {
            int j = (i + t) % 4;
            pieces.push_back(TestSet::product(
                {TestSet::interval(j / 4.0, (j + 1) / 4.0), TestSet::finite_indices({t})}));
        }
        out.push_back(TestSet::union_of(std::move(pieces)));
    }
    return out;
}

// Certifies f >= f x b_{2^m} for the rotation f: target statistics are
// computed exactly on the product action (the trivial-action coordinate is
// uniform over atoms); source sets are built by iterated blending through
// m nested almost-invariant sets whose q values are separated by >= 8.
inline BlendCertificate certify_product_with_finite(const ActionDescriptor& action, int m,
                                                    const std::vector<TestSet>& product_sets,
                                                    const FiniteSubset& S, double epsilon,
                                                    std::int64_t n_samples,
                                                    std::uint64_t rng_seed,
                                                    std::int64_t q_min = 100) {
    if (!action.is<RotationDesc>())
        throw NoAlmostInvariantSetAvailable(
            "blending construction needs a rotation (no almost invariant sequence otherwise)");
    if (m < 1 || m > 3) throw ConfigError("blend iterations m must be in 1..3");
    double alpha = action.as<RotationDesc>().alpha;
    int atoms = 1 << m;

    // nested levels with q separated by a factor >= 8
    auto qs = continued_fraction_denominators(alpha, 30);
    std::vector<std::pair<int, std::int64_t>> chosen;  // (cf index, q)
    std::int64_t need = q_min;
    for (std::size_t i = 0; i < qs.size() && static_cast<int>(chosen.size()) < m; ++i) {
        if (qs[i] >= need) {
            chosen.push_back({static_cast<int>(i) + 1, qs[i]});
            need = qs[i] * 8;
        }
    }
    if (static_cast<int>(chosen.size()) < m)
        throw ConfigError("not enough continued-fraction denominators for m blend levels");

    BlendCertificate out;
    out.iterations = m;
    std::vector<TestSet> levels;
    for (auto [idx, q] : chosen) {
        BlendLevel lvl;
        lvl.m_index = idx;
        lvl.q = q;
        lvl.defect_bound = 2.0 * circle_norm(static_cast<double>(q) * alpha);
        TestSet A = rotation_almost_invariant_set(q);
        auto diag = invariance_defect(action, A, S, std::min<std::int64_t>(n_samples, 50000),
                                      stream_seed(rng_seed, "blend/defect" + std::to_string(idx)));
        lvl.empirical_defect = diag.max_defect;
        lvl.empirical_measure = diag.measure;
        out.levels.push_back(lvl);
        levels.push_back(A);
    }

    // slice the target sets per atom
    std::vector<std::vector<IntervalSet>> slices;
    for (const auto& y : product_sets) {
        auto s = product_slices(y, atoms);
        if (!s)
            throw ConfigError("product target sets must decompose into interval-by-atom slices");
        slices.push_back(std::move(*s));
    }

    // source sets: X_i = union_t (R_t cap Y_i^(t)), R_t picked by the bits
    // of t across the nested levels (bit 0 -> first level in A, etc.)
    std::vector<TestSet> source_sets;
    for (std::size_t i = 0; i < product_sets.size(); ++i) {
        std::vector<TestSet> pieces;
        for (int t = 0; t < atoms; ++t) {
            std::vector<TestSet> parts;
            for (int lvl = 0; lvl < m; ++lvl)
                parts.push_back(((t >> lvl) & 1) ? TestSet::complement(levels[static_cast<std::size_t>(lvl)])
                                                 : levels[static_cast<std::size_t>(lvl)]);
            parts.push_back(TestSet::arcs(slices[i][static_cast<std::size_t>(t)]));
            pieces.push_back(TestSet::intersection_of(std::move(parts)));
        }
        source_sets.push_back(TestSet::union_of(std::move(pieces)));
    }

    // exact target table on f x b_atoms
    StatsMatrix target;
    target.n_sets = product_sets.size();
    target.S = S;
    target.n_samples = 0;
    target.entries.assign(S.size() * target.n_sets * target.n_sets, 0.0);
    target.std_errors.assign(target.entries.size(), 0.0);
    for (std::size_t g = 0; g < S.size(); ++g) {
        double beta = frac(static_cast<double>(S[g].z_value()) * alpha);
        for (std::size_t i = 0; i < target.n_sets; ++i)
            for (std::size_t j = 0; j < target.n_sets; ++j) {
                double sum = 0.0;
                for (int t = 0; t < atoms; ++t)
                    sum += intersect(slices[i][static_cast<std::size_t>(t)].translate(beta),
                                     slices[j][static_cast<std::size_t>(t)])
                               .measure();
                target.entries[target.offset(g, i, j)] = sum / static_cast<double>(atoms);
            }
    }

    StatsMatrix source = stats_matrix(action, source_sets, S, n_samples,
                                      stream_seed(rng_seed, "blend/stats"));
    out.certificate = check_containment(source, target, epsilon);
    return out;
}

struct ConvexReport {
    PatternStats blended;
    std::vector<double> mixture;  // (marg(phi0) + marg(phi1)) / 2
    double max_marginal_deviation = 0.0;
};

// Realizes phi((x,i)) = phi_i(x) through the set A (i = indicator of A^c)
// and compares the pushforward marginal on T against the arithmetic
// mixture of the two pure marginals, estimated on the same samples.
inline ConvexReport convex_combination_check(const ActionDescriptor& action, const SymbolMap& phi0,
                                             const SymbolMap& phi1, const TestSet& A,
                                             const FiniteSubset& T, std::int64_t n_samples,
                                             std::uint64_t rng_seed,
                                             std::int64_t pattern_cap = kDefaultPatternCap) {
    if (phi0.d != phi1.d) throw ShapeMismatch("labelings must share a symbol range");
    SymbolMap blended;
    blended.d = phi0.d;
    blended.eval = [action, phi0, phi1, A](const Point& x) {
        return member(action, A, x) ? phi0.eval(x) : phi1.eval(x);
    };
    ConvexReport out;
    out.blended = pushforward_marginal(action, blended, T, n_samples, rng_seed, pattern_cap);
    PatternStats m0 = pushforward_marginal(action, phi0, T, n_samples, rng_seed, pattern_cap);
    PatternStats m1 = pushforward_marginal(action, phi1, T, n_samples, rng_seed, pattern_cap);
    out.mixture.resize(m0.empirical.size());
    for (std::size_t c = 0; c < out.mixture.size(); ++c) {
        out.mixture[c] = 0.5 * (m0.empirical[c] + m1.empirical[c]);
        out.max_marginal_deviation = std::max(
            out.max_marginal_deviation, std::abs(out.blended.empirical[c] - out.mixture[c]));
    }
    return out;
}

}  // namespace ergolab
