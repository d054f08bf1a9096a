#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "ergolab/action.hpp"
#include "ergolab/partition.hpp"

namespace ergolab {

// Finite union of half-open arcs inside [0,1), kept sorted and disjoint.
// Supports the exact set algebra used by analytic oracles and by the
// almost-invariant-set constructions.
class IntervalSet {
public:
    using Arc = std::pair<double, double>;  // [lo, hi)

    IntervalSet() = default;
    static IntervalSet empty() { return IntervalSet(); }
    static IntervalSet full() { return interval(0.0, 1.0); }
    static IntervalSet interval(double lo, double hi) {
        IntervalSet s;
        if (hi > lo) s.arcs_.push_back({lo, hi});
        return s;
    }
    // Arc on the circle; crossing 1 splits into two pieces.
    static IntervalSet wrapped(double lo, double hi) {
        lo = frac(lo);
        IntervalSet s;
        if (hi <= 0.0) return s;
        if (hi >= 1.0) return full();
        double end = lo + hi;
        if (end <= 1.0) {
            s.arcs_.push_back({lo, end});
        } else {
            s.arcs_.push_back({lo, 1.0});
            s.arcs_.push_back({0.0, end - 1.0});
        }
        s.normalize();
        return s;
    }
    static IntervalSet from_arcs(std::vector<Arc> arcs) {
        IntervalSet s;
        s.arcs_ = std::move(arcs);
        s.normalize();
        return s;
    }

    const std::vector<Arc>& arcs() const { return arcs_; }
    bool is_empty() const { return arcs_.empty(); }

    double measure() const {
        double m = 0.0;
        for (const auto& [lo, hi] : arcs_) m += hi - lo;
        return m;
    }

    bool contains(double x) const {
        auto it = std::upper_bound(arcs_.begin(), arcs_.end(), x,
                                   [](double v, const Arc& a) { return v < a.first; });
        if (it == arcs_.begin()) return false;
        --it;
        return x >= it->first && x < it->second;
    }

    IntervalSet complement() const {
        IntervalSet out;
        double cursor = 0.0;
        for (const auto& [lo, hi] : arcs_) {
            if (lo > cursor) out.arcs_.push_back({cursor, lo});
            cursor = hi;
        }
        if (cursor < 1.0) out.arcs_.push_back({cursor, 1.0});
        return out;
    }

    IntervalSet translate(double beta) const {
        beta = frac(beta);
        std::vector<Arc> arcs;
        for (const auto& [lo, hi] : arcs_) {
            double nlo = lo + beta;
            double nhi = hi + beta;
            if (nhi <= 1.0) {
                arcs.push_back({nlo, nhi});
            } else if (nlo >= 1.0) {
                arcs.push_back({nlo - 1.0, nhi - 1.0});
            } else {
                arcs.push_back({nlo, 1.0});
                arcs.push_back({0.0, nhi - 1.0});
            }
        }
        return from_arcs(std::move(arcs));
    }

    friend IntervalSet intersect(const IntervalSet& a, const IntervalSet& b) {
        std::vector<Arc> arcs;
        for (const auto& [alo, ahi] : a.arcs_)
            for (const auto& [blo, bhi] : b.arcs_) {
                double lo = std::max(alo, blo);
                double hi = std::min(ahi, bhi);
                if (hi > lo) arcs.push_back({lo, hi});
            }
        return from_arcs(std::move(arcs));
    }

    friend IntervalSet unite(const IntervalSet& a, const IntervalSet& b) {
        std::vector<Arc> arcs = a.arcs_;
        arcs.insert(arcs.end(), b.arcs_.begin(), b.arcs_.end());
        return from_arcs(std::move(arcs));
    }

private:
    void normalize() {
        std::sort(arcs_.begin(), arcs_.end());
        std::vector<Arc> merged;
        for (const auto& arc : arcs_) {
            if (arc.second <= arc.first) continue;
            if (!merged.empty() && arc.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, arc.second);
            else
                merged.push_back(arc);
        }
        arcs_ = std::move(merged);
    }

    std::vector<Arc> arcs_;
};

// A Borel test set with decidable membership per sampled point: arcs on
// circle-valued coordinates, index sets on finite spaces, cylinders on
// shift spaces, unions of partition cells, products, and boolean
// combinations of all of these.
class TestSet {
public:
    struct Never {};
    struct Always {};
    struct Arcs {
        IntervalSet set;
    };
    struct FiniteIndices {
        std::vector<int> indices;  // sorted
    };
    struct Cylinder {
        FiniteSubset window;
        int d;
        std::vector<std::int64_t> allowed;  // sorted pattern codes
    };
    struct PartitionCells {
        Partition part;
        std::vector<std::int64_t> cells;  // sorted
    };
    struct ProductOf {
        std::vector<TestSet> factors;
    };
    struct Not {
        std::vector<TestSet> inner;  // exactly one element
    };
    struct AnyOf {
        std::vector<TestSet> parts;
    };
    struct AllOf {
        std::vector<TestSet> parts;
    };

    using Variant = std::variant<Never, Always, Arcs, FiniteIndices, Cylinder, PartitionCells,
                                 ProductOf, Not, AnyOf, AllOf>;

    TestSet() : v_(Never{}) {}
    TestSet(Variant v) : v_(std::move(v)) {}

    static TestSet empty() { return TestSet(Never{}); }
    static TestSet full() { return TestSet(Always{}); }
    static TestSet arcs(IntervalSet s) { return TestSet(Arcs{std::move(s)}); }
    static TestSet interval(double lo, double hi) {
        return arcs(IntervalSet::interval(lo, hi));
    }
    static TestSet finite_indices(std::vector<int> idx) {
        std::sort(idx.begin(), idx.end());
        return TestSet(FiniteIndices{std::move(idx)});
    }
    static TestSet cylinder(FiniteSubset window, int d, std::vector<std::int64_t> allowed) {
        std::sort(allowed.begin(), allowed.end());
        return TestSet(Cylinder{std::move(window), d, std::move(allowed)});
    }
    static TestSet partition_cells(Partition part, std::vector<std::int64_t> cells) {
        std::sort(cells.begin(), cells.end());
        return TestSet(PartitionCells{std::move(part), std::move(cells)});
    }
    static TestSet product(std::vector<TestSet> factors) {
        return TestSet(ProductOf{std::move(factors)});
    }
    static TestSet complement(TestSet t) { return TestSet(Not{{std::move(t)}}); }
    static TestSet union_of(std::vector<TestSet> parts) { return TestSet(AnyOf{std::move(parts)}); }
    static TestSet intersection_of(std::vector<TestSet> parts) {
        return TestSet(AllOf{std::move(parts)});
    }

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

inline bool member(const ActionDescriptor& action, const TestSet& set, const Point& x) {
    if (set.is<TestSet::Never>()) return false;
    if (set.is<TestSet::Always>()) return true;
    if (set.is<TestSet::Arcs>()) {
        double v = x.is<CirclePoint>() ? x.as<CirclePoint>().x : x.as<IntervalPoint>().t;
        return set.as<TestSet::Arcs>().set.contains(v);
    }
    if (set.is<TestSet::FiniteIndices>()) {
        const auto& idx = set.as<TestSet::FiniteIndices>().indices;
        return std::binary_search(idx.begin(), idx.end(), x.as<FinitePoint>().index);
    }
    if (set.is<TestSet::Cylinder>()) {
        const auto& cyl = set.as<TestSet::Cylinder>();
        const auto& shift = action.as<BernoulliShiftDesc>();
        std::int64_t code = 0;
        std::int64_t radix = 1;
        for (const auto& g : cyl.window) {
            code += radix * (symbolic_coordinate(shift, x.as<SymbolicPoint>(), g) - 1);
            radix *= cyl.d;
        }
        return std::binary_search(cyl.allowed.begin(), cyl.allowed.end(), code);
    }
    if (set.is<TestSet::PartitionCells>()) {
        const auto& pc = set.as<TestSet::PartitionCells>();
        return std::binary_search(pc.cells.begin(), pc.cells.end(), cell_index(pc.part, x));
    }
    if (set.is<TestSet::ProductOf>()) {
        const auto& factors = set.as<TestSet::ProductOf>().factors;
        const auto& prod = action.as<ProductDesc>();
        const auto& parts = x.as<ProductPoint>().parts;
        if (factors.size() != parts.size()) throw ShapeMismatch("product set arity mismatch");
        for (std::size_t i = 0; i < factors.size(); ++i)
            if (!member(prod.factors[i], factors[i], parts[i])) return false;
        return true;
    }
    if (set.is<TestSet::Not>()) return !member(action, set.as<TestSet::Not>().inner.front(), x);
    if (set.is<TestSet::AnyOf>()) {
        for (const auto& part : set.as<TestSet::AnyOf>().parts)
            if (member(action, part, x)) return true;
        return false;
    }
    const auto& parts = set.as<TestSet::AllOf>().parts;
    for (const auto& part : parts)
        if (!member(action, part, x)) return false;
    return true;
}

inline double empirical_measure(const ActionDescriptor& action, const TestSet& set,
                                std::int64_t n_samples, std::uint64_t rng_seed) {
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < n_samples; ++i)
        if (member(action, set, sample(action, rng_seed, static_cast<std::uint64_t>(i)))) ++hits;
    return static_cast<double>(hits) / static_cast<double>(n_samples);
}

// Reduces a circle-valued TestSet to its IntervalSet normal form, when the
// set is built from arcs and boolean combinations only.
inline std::optional<IntervalSet> to_interval_set(const TestSet& set) {
    if (set.is<TestSet::Never>()) return IntervalSet::empty();
    if (set.is<TestSet::Always>()) return IntervalSet::full();
    if (set.is<TestSet::Arcs>()) return set.as<TestSet::Arcs>().set;
    if (set.is<TestSet::Not>()) {
        auto inner = to_interval_set(set.as<TestSet::Not>().inner.front());
        if (!inner) return std::nullopt;
        return inner->complement();
    }
    if (set.is<TestSet::AnyOf>()) {
        IntervalSet acc = IntervalSet::empty();
        for (const auto& part : set.as<TestSet::AnyOf>().parts) {
            auto p = to_interval_set(part);
            if (!p) return std::nullopt;
            acc = unite(acc, *p);
        }
        return acc;
    }
    if (set.is<TestSet::AllOf>()) {
        IntervalSet acc = IntervalSet::full();
        for (const auto& part : set.as<TestSet::AllOf>().parts) {
            auto p = to_interval_set(part);
            if (!p) return std::nullopt;
            acc = intersect(acc, *p);
        }
        return acc;
    }
    return std::nullopt;
}

// Per-atom interval slices of a set on (circle x finite atoms), when the
// set is expressible through products of arcs and index sets. Slice t is
// {x : (x, t) in set}.
inline std::optional<std::vector<IntervalSet>> product_slices(const TestSet& set, int atoms) {
    std::vector<IntervalSet> out(static_cast<std::size_t>(atoms));
    if (set.is<TestSet::Never>()) return out;
    if (set.is<TestSet::Always>()) {
        for (auto& s : out) s = IntervalSet::full();
        return out;
    }
    if (set.is<TestSet::ProductOf>()) {
        const auto& factors = set.as<TestSet::ProductOf>().factors;
        if (factors.size() != 2) return std::nullopt;
        auto base = to_interval_set(factors[0]);
        if (!base) return std::nullopt;
        if (factors[1].is<TestSet::Always>()) {
            for (auto& s : out) s = *base;
            return out;
        }
        if (!factors[1].is<TestSet::FiniteIndices>()) return std::nullopt;
        for (int t : factors[1].as<TestSet::FiniteIndices>().indices)
            if (t >= 0 && t < atoms) out[static_cast<std::size_t>(t)] = *base;
        return out;
    }
    if (set.is<TestSet::Not>()) {
        auto inner = product_slices(set.as<TestSet::Not>().inner.front(), atoms);
        if (!inner) return std::nullopt;
        for (auto& s : *inner) s = s.complement();
        return inner;
    }
    if (set.is<TestSet::AnyOf>() || set.is<TestSet::AllOf>()) {
        bool any = set.is<TestSet::AnyOf>();
        const auto& parts =
            any ? set.as<TestSet::AnyOf>().parts : set.as<TestSet::AllOf>().parts;
        if (!any)
            for (auto& s : out) s = IntervalSet::full();
        for (const auto& part : parts) {
            auto p = product_slices(part, atoms);
            if (!p) return std::nullopt;
            for (int t = 0; t < atoms; ++t) {
                auto& slot = out[static_cast<std::size_t>(t)];
                slot = any ? unite(slot, (*p)[static_cast<std::size_t>(t)])
                           : intersect(slot, (*p)[static_cast<std::size_t>(t)]);
            }
        }
        return out;
    }
    return std::nullopt;
}

}  // namespace ergolab
