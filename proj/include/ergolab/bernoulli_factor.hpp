#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/action.hpp"
#include "ergolab/concurrency.hpp"
#include "ergolab/partition.hpp"

namespace ergolab {

inline constexpr std::int64_t kDefaultPatternCap = 4096;

// Patterns alpha in {1..d}^F are encoded in mixed radix: the symbol at the
// k-th element of F (canonical order) contributes (alpha_k - 1) * d^k.
inline std::int64_t pattern_count(int d, std::size_t window, std::int64_t cap) {
    std::int64_t n = 1;
    for (std::size_t i = 0; i < window; ++i) {
        if (n > cap / d + 1) return cap + 1;
        n *= d;
    }
    return n;
}

inline std::vector<int> decode_pattern(std::int64_t code, int d, std::size_t window) {
    std::vector<int> alpha(window);
    for (std::size_t i = 0; i < window; ++i) {
        alpha[i] = static_cast<int>(code % d) + 1;
        code /= d;
    }
    return alpha;
}

inline std::int64_t encode_pattern(const std::vector<int>& alpha, int d) {
    std::int64_t code = 0;
    std::int64_t radix = 1;
    for (int s : alpha) {
        code += radix * (s - 1);
        radix *= d;
    }
    return code;
}

// Product expectation of a pattern under kappa: prod over F of p_{alpha(g)}.
inline double product_expectation(const Distribution& kappa, const std::vector<int>& alpha) {
    double p = 1.0;
    for (int s : alpha) p *= kappa.p(s);
    return p;
}

// Empirical cylinder statistics of the map phi over the window F. In full
// enumeration mode `codes` is empty and counts are indexed by pattern code;
// with an explicit pattern list, counts align with `codes` and samples
// matching none of them land in other_count.
struct PatternStats {
    FiniteSubset F;
    int d = 1;
    std::int64_t n_samples = 0;
    std::vector<std::int64_t> codes;
    std::vector<std::int64_t> counts;
    std::vector<double> empirical;      // counts / n
    std::vector<double> expected;       // product expectations; empty when no kappa given
    double max_abs_deviation = 0.0;     // vs expected, when present
    std::int64_t other_count = 0;

    std::int64_t total_count() const {
        std::int64_t t = other_count;
        for (auto c : counts) t += c;
        return t;
    }
};

// True iff phi(f_g x) = alpha(g) for every g in F.
inline bool pattern_indicator(const ActionDescriptor& action, const SymbolMap& phi,
                              const FiniteSubset& F, const std::vector<int>& alpha,
                              const Point& x) {
    if (alpha.size() != F.size()) throw ShapeMismatch("pattern length != |F|");
    for (std::size_t k = 0; k < F.size(); ++k)
        if (phi.eval(apply(action, F[k], x)) != alpha[k]) return false;
    return true;
}

// Estimates mu(G_alpha) by sampling. With full enumeration (d^|F| within
// the cap) counts partition the sample set, so the empirical measures sum
// to one exactly (as counts over n). Beyond the cap the caller must supply
// an explicit pattern list; unmatched samples are tallied separately.
inline PatternStats estimate_pattern_measures(
    const ActionDescriptor& action, const SymbolMap& phi, const FiniteSubset& F,
    std::int64_t n_samples, std::uint64_t rng_seed,
    const std::optional<Distribution>& kappa = std::nullopt,
    std::int64_t pattern_cap = kDefaultPatternCap,
    const std::vector<std::vector<int>>& explicit_patterns = {}) {
    std::int64_t n_patterns = pattern_count(phi.d, F.size(), pattern_cap);
    bool full = explicit_patterns.empty();
    if (full && n_patterns > pattern_cap)
        throw PatternSpaceTooLarge("d^|F| exceeds cap " + std::to_string(pattern_cap) +
                                   " and no explicit pattern list was given");

    PatternStats stats;
    stats.F = F;
    stats.d = phi.d;
    stats.n_samples = n_samples;

    std::vector<std::vector<int>> patterns;
    if (full) {
        stats.counts.assign(static_cast<std::size_t>(n_patterns), 0);
    } else {
        // codes must stay representable: d^|F| below 2^62
        double space = std::pow(static_cast<double>(phi.d), static_cast<double>(F.size()));
        if (space >= std::ldexp(1.0, 62))
            throw PatternSpaceTooLarge("window too large even for explicit pattern lists");
        for (const auto& alpha : explicit_patterns) {
            if (alpha.size() != F.size()) throw ShapeMismatch("pattern length != |F|");
            stats.codes.push_back(encode_pattern(alpha, phi.d));
        }
        stats.counts.assign(stats.codes.size(), 0);
    }

    // mergeable counters: disjoint index ranges, partial counts added in
    // slot order, identical for any worker count
    int workers = env_worker_count();
    std::vector<std::vector<std::int64_t>> partial(
        static_cast<std::size_t>(workers),
        std::vector<std::int64_t>(stats.counts.size() + 1, 0));
    for_index_ranges(n_samples, workers, [&](std::int64_t begin, std::int64_t end, int slot) {
        auto& counts = partial[static_cast<std::size_t>(slot)];
        for (std::int64_t i = begin; i < end; ++i) {
            Point x = sample(action, rng_seed, static_cast<std::uint64_t>(i));
            std::int64_t code = 0;
            std::int64_t radix = 1;
            for (std::size_t k = 0; k < F.size(); ++k) {
                code += radix * (phi.eval(apply(action, F[k], x)) - 1);
                radix *= phi.d;
            }
            if (full) {
                ++counts[static_cast<std::size_t>(code)];
            } else {
                bool matched = false;
                for (std::size_t c = 0; c < stats.codes.size(); ++c)
                    if (stats.codes[c] == code) {
                        ++counts[c];
                        matched = true;
                        break;
                    }
                if (!matched) ++counts.back();
            }
        }
    });
    for (const auto& counts : partial) {
        for (std::size_t c = 0; c < stats.counts.size(); ++c) stats.counts[c] += counts[c];
        if (!full) stats.other_count += counts.back();
    }

    stats.empirical.resize(stats.counts.size());
    for (std::size_t c = 0; c < stats.counts.size(); ++c)
        stats.empirical[c] =
            static_cast<double>(stats.counts[c]) / static_cast<double>(n_samples);
    if (kappa) {
        stats.expected.resize(stats.counts.size());
        for (std::size_t c = 0; c < stats.counts.size(); ++c) {
            std::int64_t code = full ? static_cast<std::int64_t>(c) : stats.codes[c];
            stats.expected[c] =
                product_expectation(*kappa, decode_pattern(code, phi.d, F.size()));
            stats.max_abs_deviation =
                std::max(stats.max_abs_deviation, std::abs(stats.empirical[c] - stats.expected[c]));
        }
    }
    return stats;
}

// --- end-to-end construction ------------------------------------------

struct ConstructionBudget {
    double epsilon = 0.05;          // target for separation_radius
    std::int64_t n_samples = 100000;
    int n_labelings = 5;
    std::optional<std::int64_t> circle_cells;  // pin J instead of deriving from s
    std::int64_t cell_cap = kDefaultCellCap;
    std::int64_t pattern_cap = kDefaultPatternCap;
};

struct LabelingRun {
    std::uint64_t labeling_seed = 0;
    double max_abs_deviation = 0.0;
};

struct ConstructionReport {
    SeparationResult separation;
    double s = 0.0;              // partition diameter bound used
    std::int64_t cells = 0;      // J for circle partitions
    double epsilon = 0.0;        // achieved failure-rate bound from separation
    double delta = 0.0;
    std::int64_t n_samples = 0;
    int n_labelings = 0;
    std::vector<LabelingRun> labelings;
    int best_index = 0;
    double best_max_deviation = 0.0;
    PatternStats best_stats;
    std::vector<double> across_labeling_variance;  // per pattern
    double max_across_labeling_variance = 0.0;
    double var_bound_12eps = 0.0;   // 12 * epsilon
    double chebyshev_c = 0.0;       // epsilon^(1/3)
    double chebyshev_bound = 0.0;   // 12 * epsilon^(1/3)
    bool pass = false;
};

// Runs the random-labeling construction end to end: separation radius,
// partition into diameter-<s cells, independent random labelings, pattern
// statistics per labeling. Succeeds when the best labeling's max deviation
// from the product measure is below delta.
inline ConstructionReport verify_construction(const ActionDescriptor& action,
                                              const Distribution& kappa, const FiniteSubset& F,
                                              double delta, const ConstructionBudget& budget,
                                              std::uint64_t master_seed) {
    if (!(delta > 0.0)) throw ToleranceUnreachable("delta must be positive");
    double noise_floor = 3.0 / std::sqrt(static_cast<double>(budget.n_samples));
    if (delta < noise_floor)
        throw ToleranceUnreachable("delta " + std::to_string(delta) +
                                   " below sampling noise floor " + std::to_string(noise_floor));

    ConstructionReport report;
    report.delta = delta;
    report.n_samples = budget.n_samples;
    report.n_labelings = budget.n_labelings;

    report.separation = separation_radius(action, F, budget.epsilon, budget.n_samples,
                                          stream_seed(master_seed, "separation"));
    if (report.separation.non_free)
        throw NonFree("separation failed (" + report.separation.failure_reason + " condition)");
    report.epsilon = report.separation.epsilon_achieved;
    report.var_bound_12eps = 12.0 * report.epsilon;
    report.chebyshev_c = std::cbrt(report.epsilon);
    report.chebyshev_bound = 12.0 * report.chebyshev_c;

    Partition part = budget.circle_cells
                         ? circle_partition(action, *budget.circle_cells)
                         : build_partition(action, report.separation.s, budget.cell_cap);
    report.s = part.diameter_bound();
    report.cells = part.cell_count();

    std::uint64_t labeling_root = stream_seed(master_seed, "labeling");
    std::uint64_t sampling_seed = stream_seed(master_seed, "sampling");

    std::vector<std::vector<double>> per_alpha;  // [labeling][pattern]
    report.best_index = -1;
    for (int li = 0; li < budget.n_labelings; ++li) {
        std::uint64_t lab_seed = mix64(labeling_root, static_cast<std::uint64_t>(li));
        Labeling lab = random_labeling(part, kappa, lab_seed);
        PatternStats stats = estimate_pattern_measures(action, labeling_map(part, lab), F,
                                                       budget.n_samples, sampling_seed, kappa,
                                                       budget.pattern_cap);
        per_alpha.push_back(stats.empirical);
        report.labelings.push_back(LabelingRun{lab_seed, stats.max_abs_deviation});
        if (report.best_index < 0 || stats.max_abs_deviation < report.best_max_deviation) {
            report.best_index = li;
            report.best_max_deviation = stats.max_abs_deviation;
            report.best_stats = std::move(stats);
        }
    }

    std::size_t n_patterns = per_alpha.front().size();
    report.across_labeling_variance.assign(n_patterns, 0.0);
    if (budget.n_labelings > 1) {
        for (std::size_t c = 0; c < n_patterns; ++c) {
            double mean = 0.0;
            for (const auto& row : per_alpha) mean += row[c];
            mean /= static_cast<double>(per_alpha.size());
            double var = 0.0;
            for (const auto& row : per_alpha) var += (row[c] - mean) * (row[c] - mean);
            var /= static_cast<double>(per_alpha.size() - 1);
            report.across_labeling_variance[c] = var;
            report.max_across_labeling_variance =
                std::max(report.max_across_labeling_variance, var);
        }
    }

    report.pass = report.best_max_deviation < delta;
    return report;
}

}  // namespace ergolab
