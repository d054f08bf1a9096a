#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ergolab/distribution.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/group.hpp"
#include "ergolab/rational.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

inline double golden_alpha() { return (std::sqrt(5.0) - 1.0) / 2.0; }

inline double frac(double x) { return x - std::floor(x); }

// Distance from x to the nearest integer (the circle norm ||x||).
inline double circle_norm(double x) {
    double f = frac(x);
    return std::min(f, 1.0 - f);
}

inline double circle_distance(double x, double y) {
    double d = std::abs(x - y);
    return std::min(d, 1.0 - d);
}

class ActionDescriptor;

struct RotationDesc {
    double alpha;
};
struct BernoulliShiftDesc {
    GroupFamily family;
    Distribution base;
};
struct TrivialFiniteDesc {
    GroupFamily family;
    int n;
    std::vector<double> weights;  // sums to 1
};
struct TrivialIntervalDesc {
    GroupFamily family;
};
struct FiniteQuotientDesc {
    GroupFamily family;
    int size;
    // One permutation of {0..size-1} per standard generator
    // (Z: +1; Z2/Z3: +e_i; F2: a, b).
    std::vector<std::vector<int>> generator_perms;
    std::vector<Rational> weights;  // exact, sum to 1
};
struct ProductDesc {
    std::vector<ActionDescriptor> factors;
};

// A p.m.p. action at desk scale: what space, what measure, how the group
// acts. Descriptors are immutable values and cheap to copy.
class ActionDescriptor {
public:
    using Variant = std::variant<RotationDesc, BernoulliShiftDesc, TrivialFiniteDesc,
                                 TrivialIntervalDesc, FiniteQuotientDesc, ProductDesc>;

    static ActionDescriptor rotation(double alpha) {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("rotation alpha must be in (0,1)");
        return ActionDescriptor(RotationDesc{alpha});
    }
    static ActionDescriptor bernoulli_shift(GroupFamily family, Distribution base) {
        return ActionDescriptor(BernoulliShiftDesc{family, std::move(base)});
    }
    static ActionDescriptor trivial_finite(GroupFamily family, int n,
                                           std::vector<double> weights = {}) {
        if (n < 1) throw ConfigError("trivial_finite needs n >= 1");
        if (weights.empty()) weights.assign(static_cast<std::size_t>(n), 1.0 / n);
        if (static_cast<int>(weights.size()) != n) throw ConfigError("weights length != n");
        double sum = 0.0;
        for (double w : weights) sum += w;
        if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("weights must sum to 1");
        return ActionDescriptor(TrivialFiniteDesc{family, n, std::move(weights)});
    }
    static ActionDescriptor trivial_interval(GroupFamily family = GroupFamily::Z) {
        return ActionDescriptor(TrivialIntervalDesc{family});
    }
    static ActionDescriptor finite_quotient(GroupFamily family, int size,
                                            std::vector<std::vector<int>> perms,
                                            std::vector<Rational> weights = {}) {
        if (size < 1) throw ConfigError("quotient size must be >= 1");
        std::size_t expected =
            family == GroupFamily::F2 ? 2 : static_cast<std::size_t>(lattice_dim(family));
        if (perms.size() != expected) throw ConfigError("wrong number of generator permutations");
        for (const auto& p : perms) {
            if (static_cast<int>(p.size()) != size) throw ConfigError("permutation size mismatch");
            std::vector<bool> seen(static_cast<std::size_t>(size), false);
            for (int v : p) {
                if (v < 0 || v >= size || seen[static_cast<std::size_t>(v)])
                    throw ConfigError("generator table is not a permutation");
                seen[static_cast<std::size_t>(v)] = true;
            }
        }
        if (weights.empty())
            weights.assign(static_cast<std::size_t>(size), Rational(1, size));
        if (static_cast<int>(weights.size()) != size) throw ConfigError("weights length mismatch");
        Rational sum(0);
        for (const auto& w : weights) sum = sum + w;
        if (!(sum == Rational(1))) throw ConfigError("quotient weights must sum to 1");
        return ActionDescriptor(FiniteQuotientDesc{family, size, std::move(perms), std::move(weights)});
    }
    static ActionDescriptor product(std::vector<ActionDescriptor> factors) {
        if (factors.empty()) throw ConfigError("product needs at least one factor");
        return ActionDescriptor(ProductDesc{std::move(factors)});
    }

    template <class T>
    bool is() const {
        return std::holds_alternative<T>(*v_);
    }
    template <class T>
    const T& as() const {
        return std::get<T>(*v_);
    }
    const Variant& variant() const { return *v_; }

    GroupFamily family() const {
        if (is<RotationDesc>()) return GroupFamily::Z;
        if (is<BernoulliShiftDesc>()) return as<BernoulliShiftDesc>().family;
        if (is<TrivialFiniteDesc>()) return as<TrivialFiniteDesc>().family;
        if (is<TrivialIntervalDesc>()) return as<TrivialIntervalDesc>().family;
        if (is<FiniteQuotientDesc>()) return as<FiniteQuotientDesc>().family;
        return as<ProductDesc>().factors.front().family();
    }

private:
    explicit ActionDescriptor(Variant v) : v_(std::make_shared<const Variant>(std::move(v))) {}
    std::shared_ptr<const Variant> v_;
};

class Point;

struct CirclePoint {
    double x;  // in [0,1)
};
// A lazily-realized configuration in kappa^Gamma: coordinate values are a
// pure hash of (seed, group word), the shift composes into the offset.
struct SymbolicPoint {
    std::uint64_t seed;
    GroupElement offset;
};
struct FinitePoint {
    int index;
};
struct IntervalPoint {
    double t;
};
struct ProductPoint {
    std::vector<Point> parts;
};

class Point {
public:
    using Variant =
        std::variant<CirclePoint, SymbolicPoint, FinitePoint, IntervalPoint, ProductPoint>;

    Point() : v_(CirclePoint{0.0}) {}
    Point(Variant v) : v_(std::move(v)) {}

    template <class T>
    bool is() const {
        return std::holds_alternative<T>(v_);
    }
    template <class T>
    const T& as() const {
        return std::get<T>(v_);
    }

private:
    Variant v_;
};

// Coordinate of a symbolic point at gamma: omega(gamma) = base symbol at
// offset^{-1} * gamma, hashed from the point's seed.
inline int symbolic_coordinate(const BernoulliShiftDesc& shift, const SymbolicPoint& p,
                               const GroupElement& gamma) {
    std::string key = compose(invert(p.offset), gamma).canonical_bytes();
    return shift.base.symbol_from_bits(hash_bytes(p.seed, key.data(), key.size()));
}

namespace detail {

inline Point sample_impl(const ActionDescriptor& action, std::uint64_t entropy) {
    if (action.is<RotationDesc>()) return Point(CirclePoint{unit_double(mix64(entropy, 1))});
    if (action.is<BernoulliShiftDesc>())
        return Point(SymbolicPoint{mix64(entropy, 2), GroupElement::identity(action.family())});
    if (action.is<TrivialFiniteDesc>()) {
        const auto& d = action.as<TrivialFiniteDesc>();
        double u = unit_double(mix64(entropy, 3));
        double acc = 0.0;
        for (int i = 0; i < d.n; ++i) {
            acc += d.weights[static_cast<std::size_t>(i)];
            if (u < acc) return Point(FinitePoint{i});
        }
        return Point(FinitePoint{d.n - 1});
    }
    if (action.is<TrivialIntervalDesc>())
        return Point(IntervalPoint{unit_double(mix64(entropy, 4))});
    if (action.is<FiniteQuotientDesc>()) {
        const auto& d = action.as<FiniteQuotientDesc>();
        double u = unit_double(mix64(entropy, 5));
        double acc = 0.0;
        for (int i = 0; i < d.size; ++i) {
            acc += d.weights[static_cast<std::size_t>(i)].to_double();
            if (u < acc) return Point(FinitePoint{i});
        }
        return Point(FinitePoint{d.size - 1});
    }
    const auto& prod = action.as<ProductDesc>();
    std::vector<Point> parts;
    parts.reserve(prod.factors.size());
    for (std::size_t i = 0; i < prod.factors.size(); ++i)
        parts.push_back(sample_impl(prod.factors[i], mix64(entropy, 100 + i)));
    return Point(ProductPoint{std::move(parts)});
}

inline int quotient_apply(const FiniteQuotientDesc& d, const GroupElement& gamma, int x) {
    auto apply_perm = [&](const std::vector<int>& perm, std::int64_t times, int v) {
        // Inverse permutation applied for negative powers.
        if (times >= 0) {
            for (std::int64_t i = 0; i < times; ++i) v = perm[static_cast<std::size_t>(v)];
        } else {
            std::vector<int> inv(perm.size());
            for (std::size_t j = 0; j < perm.size(); ++j) inv[static_cast<std::size_t>(perm[j])] = static_cast<int>(j);
            for (std::int64_t i = 0; i < -times; ++i) v = inv[static_cast<std::size_t>(v)];
        }
        return v;
    };
    if (d.family == GroupFamily::F2) {
        // Left action: apply letters right to left.
        const std::string& w = gamma.word();
        int v = x;
        for (auto it = w.rbegin(); it != w.rend(); ++it) {
            switch (*it) {
                case 'a': v = apply_perm(d.generator_perms[0], 1, v); break;
                case 'A': v = apply_perm(d.generator_perms[0], -1, v); break;
                case 'b': v = apply_perm(d.generator_perms[1], 1, v); break;
                default: v = apply_perm(d.generator_perms[1], -1, v); break;
            }
        }
        return v;
    }
    int v = x;
    for (int axis = 0; axis < lattice_dim(d.family); ++axis)
        v = apply_perm(d.generator_perms[static_cast<std::size_t>(axis)],
                       gamma.coords()[static_cast<std::size_t>(axis)], v);
    return v;
}

}  // namespace detail

// Draws the index-th sample point of the stream identified by rng_seed.
// Pure in (action, rng_seed, index); the marginal law is the action's mu.
inline Point sample(const ActionDescriptor& action, std::uint64_t rng_seed, std::uint64_t index) {
    return detail::sample_impl(action, mix64(rng_seed, index));
}

inline void require_family(const ActionDescriptor& action, const GroupElement& gamma) {
    if (gamma.family() != action.family())
        throw GroupMismatch("group element from " + family_name(gamma.family()) +
                            " applied to action over " + family_name(action.family()));
}

inline Point apply(const ActionDescriptor& action, const GroupElement& gamma, const Point& x) {
    require_family(action, gamma);
    if (action.is<RotationDesc>())
        return Point(CirclePoint{
            frac(x.as<CirclePoint>().x + static_cast<double>(gamma.z_value()) *
                                              action.as<RotationDesc>().alpha)});
    if (action.is<BernoulliShiftDesc>()) {
        const auto& p = x.as<SymbolicPoint>();
        return Point(SymbolicPoint{p.seed, compose(gamma, p.offset)});
    }
    if (action.is<TrivialFiniteDesc>() || action.is<TrivialIntervalDesc>()) return x;
    if (action.is<FiniteQuotientDesc>())
        return Point(FinitePoint{detail::quotient_apply(action.as<FiniteQuotientDesc>(), gamma,
                                                        x.as<FinitePoint>().index)});
    const auto& prod = action.as<ProductDesc>();
    const auto& parts = x.as<ProductPoint>().parts;
    std::vector<Point> out;
    out.reserve(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        // Trivial factors accept any family; the group element lives in the
        // family of the non-trivial factors.
        const auto& f = prod.factors[i];
        if (f.is<TrivialFiniteDesc>() || f.is<TrivialIntervalDesc>()) {
            out.push_back(parts[i]);
        } else {
            out.push_back(apply(f, gamma, parts[i]));
        }
    }
    return Point(ProductPoint{std::move(out)});
}

namespace detail {

// First radius (0..32) at which two symbolic points disagree; distance is
// 2^-r, or 0 if they agree through radius 32 (or through the enumeration
// budget on F2, where balls grow exponentially).
inline double symbolic_distance(const BernoulliShiftDesc& shift, const SymbolicPoint& a,
                                const SymbolicPoint& b) {
    if (a.seed == b.seed && a.offset == b.offset) return 0.0;
    constexpr int kMaxRadius = 32;
    constexpr std::size_t kElementBudget = 1u << 20;
    std::size_t examined = 0;
    if (shift.family == GroupFamily::F2) {
        std::vector<GroupElement> frontier{GroupElement::identity(GroupFamily::F2)};
        for (int r = 0; r <= kMaxRadius; ++r) {
            for (const auto& g : frontier) {
                if (symbolic_coordinate(shift, a, g) != symbolic_coordinate(shift, b, g))
                    return std::ldexp(1.0, -r);
            }
            examined += frontier.size();
            if (examined > kElementBudget) return 0.0;
            std::vector<GroupElement> next;
            next.reserve(frontier.size() * 3);
            for (const auto& w : frontier)
                for (char c : {'a', 'A', 'b', 'B'}) {
                    GroupElement ext = compose(w, GroupElement::f2(std::string_view(&c, 1)));
                    if (ext.length() == w.length() + 1) next.push_back(ext);
                }
            frontier = std::move(next);
        }
        return 0.0;
    }
    for (int r = 0; r <= kMaxRadius; ++r) {
        FiniteSubset sphere = ball(shift.family, r);
        for (const auto& g : sphere) {
            if (g.length() != r) continue;
            if (symbolic_coordinate(shift, a, g) != symbolic_coordinate(shift, b, g))
                return std::ldexp(1.0, -r);
        }
    }
    return 0.0;
}

}  // namespace detail

// Compact metric per action kind: circle arc length, 2^-r on shift spaces,
// discrete on finite sets, |t-t'| on the interval, max over product factors.
inline double distance(const ActionDescriptor& action, const Point& x, const Point& y) {
    if (action.is<RotationDesc>())
        return circle_distance(x.as<CirclePoint>().x, y.as<CirclePoint>().x);
    if (action.is<BernoulliShiftDesc>())
        return detail::symbolic_distance(action.as<BernoulliShiftDesc>(), x.as<SymbolicPoint>(),
                                         y.as<SymbolicPoint>());
    if (action.is<TrivialFiniteDesc>() || action.is<FiniteQuotientDesc>())
        return x.as<FinitePoint>().index == y.as<FinitePoint>().index ? 0.0 : 1.0;
    if (action.is<TrivialIntervalDesc>())
        return std::abs(x.as<IntervalPoint>().t - y.as<IntervalPoint>().t);
    const auto& prod = action.as<ProductDesc>();
    const auto& xs = x.as<ProductPoint>().parts;
    const auto& ys = y.as<ProductPoint>().parts;
    double d = 0.0;
    for (std::size_t i = 0; i < prod.factors.size(); ++i)
        d = std::max(d, distance(prod.factors[i], xs[i], ys[i]));
    return d;
}

// --- separation radius ------------------------------------------------

struct SeparationResult {
    bool non_free = false;
    std::string failure_reason;  // "single" or "pair" when non_free
    double s = 0.0;
    int grid_exponent = 0;  // s == 2^-grid_exponent
    double epsilon_achieved = 1.0;
    double single_failure_rate = 0.0;
    double pair_failure_rate = 0.0;
    std::int64_t n_samples = 0;
};

// Upper confidence bound for a failure probability from (fails, n);
// the 3/n term keeps the bound honest at zero observed failures.
inline double failure_rate_ucb(std::int64_t fails, std::int64_t n) {
    double p = static_cast<double>(fails) / static_cast<double>(n);
    return p + 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)) +
           3.0 / static_cast<double>(n);
}

// Monte Carlo effectivization of the separation lemma: largest dyadic
// s in {2^-1..2^-20} such that both the single-point condition
//   d(f_g x, f_g' x) > s for all g != g' in F
// and the independent-pair condition
//   d(f_g x, f_g' x') > s for all g, g' in F
// hold with empirical rate > 1 - eps/2 and failure-rate UCB < eps.
// Reports NonFree when no candidate works (reason "single" when even the
// smallest s fails the single-point condition).
inline SeparationResult separation_radius(const ActionDescriptor& action, const FiniteSubset& F,
                                          double eps, std::int64_t n_samples,
                                          std::uint64_t rng_seed) {
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("separation epsilon must be in (0,1)");
    if (n_samples < 1) throw ConfigError("separation needs n_samples >= 1");
    constexpr int kMaxExponent = 20;

    std::uint64_t single_seed = stream_seed(rng_seed, "separation/single");
    std::uint64_t pair_seed_a = stream_seed(rng_seed, "separation/pair_a");
    std::uint64_t pair_seed_b = stream_seed(rng_seed, "separation/pair_b");

    std::vector<Point> orbit(F.size());
    // Per-sample minimum distances; a candidate s fails on a sample iff
    // the minimum is <= s.
    std::vector<double> min_single(static_cast<std::size_t>(n_samples), 2.0);
    std::vector<double> min_pair(static_cast<std::size_t>(n_samples), 2.0);

    for (std::int64_t i = 0; i < n_samples; ++i) {
        Point x = sample(action, single_seed, static_cast<std::uint64_t>(i));
        for (std::size_t a = 0; a < F.size(); ++a) orbit[a] = apply(action, F[a], x);
        double m = 2.0;
        for (std::size_t a = 0; a < F.size(); ++a)
            for (std::size_t b = a + 1; b < F.size(); ++b)
                m = std::min(m, distance(action, orbit[a], orbit[b]));
        min_single[static_cast<std::size_t>(i)] = m;

        Point xa = sample(action, pair_seed_a, static_cast<std::uint64_t>(i));
        Point xb = sample(action, pair_seed_b, static_cast<std::uint64_t>(i));
        double mp = 2.0;
        for (std::size_t a = 0; a < F.size(); ++a) {
            Point fa = apply(action, F[a], xa);
            for (std::size_t b = 0; b < F.size(); ++b)
                mp = std::min(mp, distance(action, fa, apply(action, F[b], xb)));
        }
        min_pair[static_cast<std::size_t>(i)] = mp;
    }

    SeparationResult res;
    res.n_samples = n_samples;
    for (int e = 1; e <= kMaxExponent; ++e) {
        double s = std::ldexp(1.0, -e);
        std::int64_t fail_single = 0;
        std::int64_t fail_pair = 0;
        for (std::int64_t i = 0; i < n_samples; ++i) {
            if (min_single[static_cast<std::size_t>(i)] <= s) ++fail_single;
            if (min_pair[static_cast<std::size_t>(i)] <= s) ++fail_pair;
        }
        double rs = static_cast<double>(fail_single) / static_cast<double>(n_samples);
        double rp = static_cast<double>(fail_pair) / static_cast<double>(n_samples);
        double ucb = std::max(failure_rate_ucb(fail_single, n_samples),
                              failure_rate_ucb(fail_pair, n_samples));
        bool ok = rs < eps / 2.0 && rp < eps / 2.0 && ucb < eps;
        if (ok) {
            res.s = s;
            res.grid_exponent = e;
            res.epsilon_achieved = ucb;
            res.single_failure_rate = rs;
            res.pair_failure_rate = rp;
            return res;
        }
        if (e == kMaxExponent) {
            res.non_free = true;
            res.failure_reason = (rs >= eps / 2.0 ||
                                  failure_rate_ucb(fail_single, n_samples) >= eps)
                                     ? "single"
                                     : "pair";
            res.single_failure_rate = rs;
            res.pair_failure_rate = rp;
        }
    }
    return res;
}

}  // namespace ergolab
