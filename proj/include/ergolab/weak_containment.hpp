#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ergolab/action.hpp"
#include "ergolab/bernoulli_factor.hpp"
#include "ergolab/concurrency.hpp"
#include "ergolab/test_set.hpp"

namespace ergolab {

// Statistics matrix mu(f_g X_i cap X_j) for g in S over test sets X_i.
// n_samples == 0 marks an exact table.
struct StatsMatrix {
    std::size_t n_sets = 0;
    FiniteSubset S;
    std::int64_t n_samples = 0;
    std::vector<double> entries;     // flattened [g][i][j]
    std::vector<double> std_errors;  // zero for exact tables

    std::size_t offset(std::size_t g, std::size_t i, std::size_t j) const {
        return (g * n_sets + i) * n_sets + j;
    }
    double at(std::size_t g, std::size_t i, std::size_t j) const {
        return entries[offset(g, i, j)];
    }
    double se(std::size_t g, std::size_t i, std::size_t j) const {
        return std_errors[offset(g, i, j)];
    }
};

using MembershipFn = std::function<bool(const Point&)>;

// Core estimator over arbitrary membership indicators. The measure of
// f_g X_i cap X_j is estimated as the frequency of
// { x : x in X_j and f_{g^-1} x in X_i }, which is equivalent under
// measure preservation and avoids inverting sets.
inline StatsMatrix stats_matrix_fn(const ActionDescriptor& action,
                                   const std::vector<MembershipFn>& sets, const FiniteSubset& S,
                                   std::int64_t n_samples, std::uint64_t rng_seed) {
    if (sets.empty()) throw ShapeMismatch("stats_matrix needs at least one set");
    StatsMatrix m;
    m.n_sets = sets.size();
    m.S = S;
    m.n_samples = n_samples;
    std::vector<std::int64_t> counts(S.size() * sets.size() * sets.size(), 0);
    int workers = env_worker_count();
    std::vector<std::vector<std::int64_t>> partial(
        static_cast<std::size_t>(workers), std::vector<std::int64_t>(counts.size(), 0));
    for_index_ranges(n_samples, workers, [&](std::int64_t begin, std::int64_t end, int slot) {
        auto& local = partial[static_cast<std::size_t>(slot)];
        std::vector<char> memb_x(sets.size());
        std::vector<char> memb_g(sets.size());
        for (std::int64_t it = begin; it < end; ++it) {
            Point x = sample(action, rng_seed, static_cast<std::uint64_t>(it));
            for (std::size_t j = 0; j < sets.size(); ++j) memb_x[j] = sets[j](x) ? 1 : 0;
            for (std::size_t g = 0; g < S.size(); ++g) {
                Point y = apply(action, invert(S[g]), x);
                for (std::size_t i = 0; i < sets.size(); ++i) memb_g[i] = sets[i](y) ? 1 : 0;
                for (std::size_t i = 0; i < sets.size(); ++i) {
                    if (!memb_g[i]) continue;
                    for (std::size_t j = 0; j < sets.size(); ++j)
                        if (memb_x[j]) ++local[(g * sets.size() + i) * sets.size() + j];
                }
            }
        }
    });
    for (const auto& local : partial)
        for (std::size_t c = 0; c < counts.size(); ++c) counts[c] += local[c];
    m.entries.resize(counts.size());
    m.std_errors.resize(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c) {
        double p = static_cast<double>(counts[c]) / static_cast<double>(n_samples);
        m.entries[c] = p;
        m.std_errors[c] = std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
    }
    return m;
}

inline StatsMatrix stats_matrix(const ActionDescriptor& action, const std::vector<TestSet>& sets,
                                const FiniteSubset& S, std::int64_t n_samples,
                                std::uint64_t rng_seed) {
    std::vector<MembershipFn> fns;
    fns.reserve(sets.size());
    for (const auto& set : sets)
        fns.push_back([action, set](const Point& x) { return member(action, set, x); });
    return stats_matrix_fn(action, fns, S, n_samples, rng_seed);
}

// Exact table for the cyclic action of Z on n points with Y_i = {i}:
// nu(g_m Y_i cap Y_j) = 1/n when j = i + m (mod n), else 0.
inline StatsMatrix cyclic_action_table(int n, const FiniteSubset& S) {
    StatsMatrix m;
    m.n_sets = static_cast<std::size_t>(n);
    m.S = S;
    m.n_samples = 0;
    m.entries.assign(S.size() * m.n_sets * m.n_sets, 0.0);
    m.std_errors.assign(m.entries.size(), 0.0);
    for (std::size_t g = 0; g < S.size(); ++g) {
        std::int64_t shift = S[g].z_value();
        for (int i = 0; i < n; ++i) {
            int j = static_cast<int>(((i + shift) % n + n) % n);
            m.entries[m.offset(g, static_cast<std::size_t>(i), static_cast<std::size_t>(j))] =
                1.0 / static_cast<double>(n);
        }
    }
    return m;
}

// Exact table for a rotation with interval-union test sets:
// mu(f_g X_i cap X_j) = len(translate(X_i, g*alpha) cap X_j).
inline StatsMatrix exact_rotation_stats(double alpha, const std::vector<IntervalSet>& sets,
                                        const FiniteSubset& S) {
    StatsMatrix m;
    m.n_sets = sets.size();
    m.S = S;
    m.n_samples = 0;
    m.entries.assign(S.size() * m.n_sets * m.n_sets, 0.0);
    m.std_errors.assign(m.entries.size(), 0.0);
    for (std::size_t g = 0; g < S.size(); ++g) {
        double beta = frac(static_cast<double>(S[g].z_value()) * alpha);
        for (std::size_t i = 0; i < sets.size(); ++i) {
            IntervalSet moved = sets[i].translate(beta);
            for (std::size_t j = 0; j < sets.size(); ++j)
                m.entries[m.offset(g, i, j)] = intersect(moved, sets[j]).measure();
        }
    }
    return m;
}

struct ContainmentCertificate {
    double epsilon = 0.0;
    double max_deviation = 0.0;
    std::size_t argmax_g = 0, argmax_i = 0, argmax_j = 0;
    bool pass = false;
    StatsMatrix source;
    StatsMatrix target;
};

// Compares source statistics against target statistics entrywise; the
// certificate passes iff the max deviation is below epsilon.
inline ContainmentCertificate check_containment(const StatsMatrix& source,
                                                const StatsMatrix& target, double epsilon) {
    if (source.n_sets != target.n_sets || !(source.S == target.S))
        throw ShapeMismatch("source/target statistics shapes differ");
    ContainmentCertificate cert;
    cert.epsilon = epsilon;
    cert.source = source;
    cert.target = target;
    for (std::size_t g = 0; g < source.S.size(); ++g)
        for (std::size_t i = 0; i < source.n_sets; ++i)
            for (std::size_t j = 0; j < source.n_sets; ++j) {
                double dev = std::abs(source.at(g, i, j) - target.at(g, i, j));
                if (dev > cert.max_deviation) {
                    cert.max_deviation = dev;
                    cert.argmax_g = g;
                    cert.argmax_i = i;
                    cert.argmax_j = j;
                }
            }
    cert.pass = cert.max_deviation < epsilon;
    return cert;
}

// Empirical distribution of the pattern (phi(f_g x))_{g in T}: the marginal
// of the pushforward Phi(x)(g) = phi(f_g x) on the window T. Shares its
// estimator with estimate_pattern_measures, so equal seeds give equal counts.
inline PatternStats pushforward_marginal(const ActionDescriptor& action, const SymbolMap& phi,
                                         const FiniteSubset& T, std::int64_t n_samples,
                                         std::uint64_t rng_seed,
                                         std::int64_t pattern_cap = kDefaultPatternCap) {
    return estimate_pattern_measures(action, phi, T, n_samples, rng_seed, std::nullopt,
                                     pattern_cap);
}

// Midpoint of the j-th level, j in {1..levels}.
inline double discretize_level(int levels, int symbol) {
    return (static_cast<double>(symbol - 1) + 0.5) / static_cast<double>(levels);
}

// Finite-range approximation of a circle-valued observable: snaps to the
// nearest of `levels` midpoints, so sup |phi - phi_n| <= 1/(2n).
inline SymbolMap discretize_map(std::function<double(const Point&)> observable, int levels) {
    if (levels < 1) throw ConfigError("discretize_map needs levels >= 1");
    SymbolMap m;
    m.d = levels;
    m.eval = [observable = std::move(observable), levels](const Point& x) {
        double v = observable(x);
        v = std::min(std::max(v, 0.0), std::nextafter(1.0, 0.0));
        return static_cast<int>(std::floor(v * levels)) + 1;
    };
    return m;
}

}  // namespace ergolab
