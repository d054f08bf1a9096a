#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ergolab/action.hpp"
#include "ergolab/rational.hpp"
#include "ergolab/weak_containment.hpp"

namespace ergolab {

// Tower of height n over the base A_k of the binary shift; p is the
// success probability of the base coordinates.
struct TowerParams {
    int n = 2;
    int k = 1;
    Rational p = Rational(1, 2);
};

inline void validate(const TowerParams& params) {
    if (params.n < 2) throw ConfigError("tower height n must be >= 2");
    if (params.k < 1) throw ConfigError("block count k must be >= 1");
    if (!(params.p > Rational(0) && params.p < Rational(1)))
        throw ConfigError("p must be in (0,1)");
}

// The shift the tower lives on: {0,1}^Z with P(bit=1) = p. Bits are
// symbol - 1 of the two-symbol base distribution.
inline ActionDescriptor tower_shift_action(const TowerParams& params) {
    double p = params.p.to_double();
    return ActionDescriptor::bernoulli_shift(GroupFamily::Z, Distribution({1.0 - p, p}));
}

inline int coordinate_bit(const BernoulliShiftDesc& shift, const SymbolicPoint& w,
                          std::int64_t position) {
    return symbolic_coordinate(shift, w, GroupElement::z(position)) - 1;
}

// ||w||_{k,l} = sum_{i<k} w(i*n + l).
inline int block_sum(const BernoulliShiftDesc& shift, const SymbolicPoint& w, int k, int l,
                     int n) {
    int sum = 0;
    for (int i = 0; i < k; ++i)
        sum += coordinate_bit(shift, w, static_cast<std::int64_t>(i) * n + l);
    return sum;
}

// w in A_k iff ||w||_{k,0} > ||w||_{k,l} + n for every l in {1..n-1}.
inline bool in_tower_base(const BernoulliShiftDesc& shift, const SymbolicPoint& w,
                          const TowerParams& params) {
    int b0 = block_sum(shift, w, params.k, 0, params.n);
    if (b0 <= params.n) return false;
    for (int l = 1; l < params.n; ++l)
        if (b0 <= block_sum(shift, w, params.k, l, params.n) + params.n) return false;
    return true;
}

struct BaseMeasure {
    long double value = 0.0L;
    std::optional<Rational> exact;  // present in rational mode (k*n <= 20)
};

inline constexpr std::int64_t kRationalModeLimit = 20;
inline constexpr std::int64_t kTowerDpBudget = 10000000;

// P(B_0 > B_l + n for all l in {1..n-1}) with B_l i.i.d. Binomial(k, p),
// via the distribution of B_0 and the cdf of each independent competitor:
//   sum_b pmf(b) * cdf(b - n - 1)^(n-1).
// Rational arithmetic when k*n <= 20, 80-bit floating accumulation above.
inline BaseMeasure base_measure_exact(const TowerParams& params) {
    validate(params);
    std::int64_t kn = static_cast<std::int64_t>(params.k) * params.n;
    if (kn > kTowerDpBudget) throw BudgetExceeded("tower DP budget k*n <= 1e7 exceeded");
    BaseMeasure out;

    {
        long double p = static_cast<long double>(params.p.to_long_double());
        long double q = 1.0L - p;
        std::vector<long double> pmf(static_cast<std::size_t>(params.k) + 1);
        pmf[0] = std::pow(q, static_cast<long double>(params.k));
        for (int b = 0; b < params.k; ++b)
            pmf[static_cast<std::size_t>(b) + 1] = pmf[static_cast<std::size_t>(b)] *
                                                   static_cast<long double>(params.k - b) /
                                                   static_cast<long double>(b + 1) * (p / q);
        std::vector<long double> cdf(pmf.size());
        long double acc = 0.0L;
        for (std::size_t b = 0; b < pmf.size(); ++b) {
            acc += pmf[b];
            cdf[b] = acc;
        }
        long double total = 0.0L;
        for (int b = 0; b <= params.k; ++b) {
            int t = b - params.n - 1;
            if (t < 0) continue;
            long double term = pmf[static_cast<std::size_t>(b)];
            for (int l = 1; l < params.n; ++l) term *= cdf[static_cast<std::size_t>(t)];
            total += term;
        }
        out.value = total;
    }

    if (kn <= kRationalModeLimit) {
        Rational p = params.p;
        Rational q = Rational(1) - p;
        std::vector<Rational> pmf(static_cast<std::size_t>(params.k) + 1);
        pmf[0] = q.pow(params.k);
        for (int b = 0; b < params.k; ++b)
            pmf[static_cast<std::size_t>(b) + 1] =
                pmf[static_cast<std::size_t>(b)] * Rational(params.k - b, b + 1) * (p / q);
        std::vector<Rational> cdf(pmf.size());
        Rational acc(0);
        for (std::size_t b = 0; b < pmf.size(); ++b) {
            acc = acc + pmf[b];
            cdf[b] = acc;
        }
        Rational total(0);
        for (int b = 0; b <= params.k; ++b) {
            int t = b - params.n - 1;
            if (t < 0) continue;
            Rational term = pmf[static_cast<std::size_t>(b)];
            for (int l = 1; l < params.n; ++l) term = term * cdf[static_cast<std::size_t>(t)];
            total = total + term;
        }
        out.exact = total;
    }
    return out;
}

struct TowerReport {
    TowerParams params;
    BaseMeasure exact_base_measure;
    double empirical_base_measure = 0.0;
    std::int64_t disjointness_violations = 0;
    std::int64_t n_samples = 0;
    ContainmentCertificate certificate;  // tower levels vs exact cyclic table
};

namespace detail {

// Membership of T^t w in A_k read off a contiguous bit buffer. buffer[i]
// holds w(i + lo); every block-sum index stays in range when
// lo <= l - t and (k-1)n + (n-1) - t < lo + size.
inline bool in_base_from_buffer(const std::vector<std::uint8_t>& buffer, std::int64_t lo,
                                int t, const TowerParams& params) {
    auto bit = [&](std::int64_t pos) {
        return static_cast<int>(buffer[static_cast<std::size_t>(pos - lo)]);
    };
    int b0 = 0;
    for (int i = 0; i < params.k; ++i)
        b0 += bit(static_cast<std::int64_t>(i) * params.n - t);
    if (b0 <= params.n) return false;
    for (int l = 1; l < params.n; ++l) {
        int bl = 0;
        for (int i = 0; i < params.k; ++i)
            bl += bit(static_cast<std::int64_t>(i) * params.n + l - t);
        if (b0 <= bl + params.n) return false;
    }
    return true;
}

}  // namespace detail

// Samples the shift, tests membership in the tower levels X_l = T^l A_k,
// counts joint memberships (must be zero by disjointness), and certifies
// the induced statistics against the exact cyclic table. Each sample's
// coordinate window is hashed once into a bit buffer; all level and shift
// memberships are block sums over that buffer.
inline TowerReport tower_certificate(const TowerParams& params, std::int64_t n_samples,
                                     const FiniteSubset& S, std::uint64_t rng_seed,
                                     double epsilon = 0.1) {
    validate(params);
    std::int64_t max_shift = 0;
    for (const auto& g : S) {
        if (std::llabs(g.z_value()) > params.n)
            throw ConfigError("tower certificate needs S within ball(Z, n)");
        max_shift = std::max<std::int64_t>(max_shift, std::llabs(g.z_value()));
    }
    ActionDescriptor action = tower_shift_action(params);
    const auto& shift = action.as<BernoulliShiftDesc>();

    TowerReport report;
    report.params = params;
    report.n_samples = n_samples;
    report.exact_base_measure = base_measure_exact(params);

    // membership of x in X_l needs t = -l; membership of f_{g^-1} x in X_i
    // needs t = -g - i; cover t in [-(max_shift + n - 1), max_shift]
    std::int64_t t_lo = -(max_shift + params.n - 1);
    std::int64_t t_hi = max_shift;
    std::int64_t pos_lo = 0 - t_hi;
    std::int64_t pos_hi = static_cast<std::int64_t>(params.k) * params.n - 1 - t_lo;

    std::uint64_t stats_seed = stream_seed(rng_seed, "tower/stats");
    std::size_t n_sets = static_cast<std::size_t>(params.n);
    std::vector<std::int64_t> counts(S.size() * n_sets * n_sets, 0);
    std::int64_t base_hits = 0;
    std::vector<std::uint8_t> buffer(static_cast<std::size_t>(pos_hi - pos_lo + 1));
    std::vector<std::uint8_t> level_memb(n_sets);
    std::vector<std::uint8_t> shifted_memb(n_sets);

    for (std::int64_t it = 0; it < n_samples; ++it) {
        Point w = sample(action, stats_seed, static_cast<std::uint64_t>(it));
        const auto& pt = w.as<SymbolicPoint>();
        for (std::int64_t pos = pos_lo; pos <= pos_hi; ++pos)
            buffer[static_cast<std::size_t>(pos - pos_lo)] =
                static_cast<std::uint8_t>(coordinate_bit(shift, pt, pos));

        int inside = 0;
        for (int l = 0; l < params.n; ++l) {
            level_memb[static_cast<std::size_t>(l)] =
                detail::in_base_from_buffer(buffer, pos_lo, -l, params) ? 1 : 0;
            inside += level_memb[static_cast<std::size_t>(l)];
        }
        if (inside > 1) ++report.disjointness_violations;
        base_hits += level_memb[0];

        for (std::size_t g = 0; g < S.size(); ++g) {
            auto gamma = S[g].z_value();
            for (int i = 0; i < params.n; ++i)
                shifted_memb[static_cast<std::size_t>(i)] =
                    gamma == 0 ? level_memb[static_cast<std::size_t>(i)]
                               : (detail::in_base_from_buffer(
                                      buffer, pos_lo, static_cast<int>(-gamma - i), params)
                                      ? 1
                                      : 0);
            for (std::size_t i = 0; i < n_sets; ++i) {
                if (!shifted_memb[i]) continue;
                for (std::size_t j = 0; j < n_sets; ++j)
                    if (level_memb[j]) ++counts[(g * n_sets + i) * n_sets + j];
            }
        }
    }
    report.empirical_base_measure =
        static_cast<double>(base_hits) / static_cast<double>(n_samples);

    StatsMatrix source;
    source.n_sets = n_sets;
    source.S = S;
    source.n_samples = n_samples;
    source.entries.resize(counts.size());
    source.std_errors.resize(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c) {
        double p = static_cast<double>(counts[c]) / static_cast<double>(n_samples);
        source.entries[c] = p;
        source.std_errors[c] = std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
    }
    StatsMatrix target = cyclic_action_table(params.n, S);
    report.certificate = check_containment(source, target, epsilon);
    return report;
}

}  // namespace ergolab
