#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "ergolab/action.hpp"
#include "ergolab/errors.hpp"

namespace ergolab {

class Partition;

// Circle (or unit interval) split into J equal half-open arcs [j/J,(j+1)/J).
struct CircleArcsPart {
    std::int64_t arcs;
};
// Shift space split into cylinders over ball(radius): one cell per symbol
// assignment on the window.
struct CylinderPart {
    int radius;
    FiniteSubset window;
    int d;
};
// Finite spaces get singleton cells.
struct SingletonPart {
    int n;
};
struct ProductPart {
    std::vector<Partition> factors;
};

// Finite Borel partition with cells of diameter < diameter_bound.
class Partition {
public:
    using Variant = std::variant<CircleArcsPart, CylinderPart, SingletonPart, ProductPart>;

    Partition(ActionDescriptor action, double diameter_bound, Variant v, std::int64_t cells)
        : action_(std::move(action)),
          diameter_bound_(diameter_bound),
          v_(std::move(v)),
          cells_(cells) {}

    const ActionDescriptor& action() const { return action_; }
    double diameter_bound() const { return diameter_bound_; }
    std::int64_t cell_count() const { return cells_; }
    template <class T>
    bool is() const {
        return std::holds_alternative<T>(v_);
    }
    template <class T>
    const T& as() const {
        return std::get<T>(v_);
    }

private:
    ActionDescriptor action_;
    double diameter_bound_;
    Variant v_;
    std::int64_t cells_;
};

inline constexpr std::int64_t kDefaultCellCap = std::int64_t(1) << 20;

// Builds a partition of the action's space into cells of diameter < s.
inline Partition build_partition(const ActionDescriptor& action, double s,
                                 std::int64_t cell_cap = kDefaultCellCap) {
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("partition diameter must be in (0,1]");
    if (action.is<RotationDesc>() || action.is<TrivialIntervalDesc>()) {
        // Smallest J with 1/J < s.
        auto J = static_cast<std::int64_t>(std::floor(1.0 / s)) + 1;
        if (J > cell_cap)
            throw PartitionTooFine("circle partition with " + std::to_string(J) + " arcs");
        return Partition(action, s, CircleArcsPart{J}, J);
    }
    if (action.is<BernoulliShiftDesc>()) {
        int r = 0;
        while (std::ldexp(1.0, -r) >= s) ++r;
        const auto& shift = action.as<BernoulliShiftDesc>();
        FiniteSubset window = ball(shift.family, r);
        double cells = std::pow(static_cast<double>(shift.base.d()),
                                static_cast<double>(window.size()));
        if (cells > static_cast<double>(cell_cap))
            throw PartitionTooFine("cylinder partition over ball(" + std::to_string(r) + ")");
        return Partition(action, s, CylinderPart{r, window, shift.base.d()},
                         static_cast<std::int64_t>(cells));
    }
    if (action.is<TrivialFiniteDesc>())
        return Partition(action, s, SingletonPart{action.as<TrivialFiniteDesc>().n},
                         action.as<TrivialFiniteDesc>().n);
    if (action.is<FiniteQuotientDesc>())
        return Partition(action, s, SingletonPart{action.as<FiniteQuotientDesc>().size},
                         action.as<FiniteQuotientDesc>().size);
    const auto& prod = action.as<ProductDesc>();
    std::vector<Partition> factors;
    std::int64_t cells = 1;
    for (const auto& f : prod.factors) {
        factors.push_back(build_partition(f, s, cell_cap));
        if (cells > cell_cap / std::max<std::int64_t>(factors.back().cell_count(), 1))
            throw PartitionTooFine("product partition exceeds cell cap");
        cells *= factors.back().cell_count();
    }
    return Partition(action, s, ProductPart{std::move(factors)}, cells);
}

// Circle partition pinned to an explicit arc count.
inline Partition circle_partition(const ActionDescriptor& action, std::int64_t arcs) {
    if (!action.is<RotationDesc>() && !action.is<TrivialIntervalDesc>())
        throw ConfigError("explicit arc count requires a circle-valued action");
    if (arcs < 1) throw ConfigError("need at least one arc");
    return Partition(action, 1.0 / static_cast<double>(arcs), CircleArcsPart{arcs}, arcs);
}

inline std::int64_t cell_index(const Partition& part, const Point& x) {
    if (part.is<CircleArcsPart>()) {
        auto J = part.as<CircleArcsPart>().arcs;
        double v = x.is<CirclePoint>() ? x.as<CirclePoint>().x : x.as<IntervalPoint>().t;
        auto idx = static_cast<std::int64_t>(std::floor(v * static_cast<double>(J)));
        return std::min(std::max<std::int64_t>(idx, 0), J - 1);
    }
    if (part.is<CylinderPart>()) {
        const auto& cyl = part.as<CylinderPart>();
        const auto& shift = part.action().as<BernoulliShiftDesc>();
        std::int64_t code = 0;
        std::int64_t radix = 1;
        for (const auto& g : cyl.window) {
            code += radix * (symbolic_coordinate(shift, x.as<SymbolicPoint>(), g) - 1);
            radix *= cyl.d;
        }
        return code;
    }
    if (part.is<SingletonPart>()) return x.as<FinitePoint>().index;
    const auto& prod = part.as<ProductPart>();
    const auto& parts = x.as<ProductPoint>().parts;
    std::int64_t code = 0;
    std::int64_t radix = 1;
    for (std::size_t i = 0; i < prod.factors.size(); ++i) {
        code += radix * cell_index(prod.factors[i], parts[i]);
        radix *= prod.factors[i].cell_count();
    }
    return code;
}

// A symbol per cell, drawn i.i.d. from the base distribution. Together with
// a Partition this is the random map phi: X -> {1..d}.
struct Labeling {
    int d = 1;
    std::uint64_t source_seed = 0;
    std::vector<std::uint8_t> symbols;  // 1-based, one per cell

    int symbol_at(std::int64_t cell) const {
        return static_cast<int>(symbols[static_cast<std::size_t>(cell)]);
    }
};

inline Labeling random_labeling(const Partition& part, const Distribution& kappa,
                                std::uint64_t seed) {
    Labeling lab;
    lab.d = kappa.d();
    lab.source_seed = seed;
    lab.symbols.resize(static_cast<std::size_t>(part.cell_count()));
    for (std::int64_t j = 0; j < part.cell_count(); ++j)
        lab.symbols[static_cast<std::size_t>(j)] =
            static_cast<std::uint8_t>(kappa.symbol_from_bits(mix64(seed, static_cast<std::uint64_t>(j))));
    return lab;
}

// A measurable map phi: X -> {1..d}, packaged with its range size.
struct SymbolMap {
    int d = 1;
    std::function<int(const Point&)> eval;
};

inline SymbolMap labeling_map(Partition part, Labeling lab) {
    SymbolMap m;
    m.d = lab.d;
    m.eval = [part = std::move(part), lab = std::move(lab)](const Point& x) {
        return lab.symbol_at(cell_index(part, x));
    };
    return m;
}

// phi(omega) = omega(e): reads the coordinate at the identity, so the
// factor map is the shift itself.
inline SymbolMap coordinate_map(const ActionDescriptor& shift_action) {
    const auto& shift = shift_action.as<BernoulliShiftDesc>();
    SymbolMap m;
    m.d = shift.base.d();
    GroupElement e = GroupElement::identity(shift.family);
    m.eval = [shift, e](const Point& x) {
        return symbolic_coordinate(shift, x.as<SymbolicPoint>(), e);
    };
    return m;
}

inline SymbolMap constant_map(int d, int symbol) {
    SymbolMap m;
    m.d = d;
    m.eval = [symbol](const Point&) { return symbol; };
    return m;
}

}  // namespace ergolab
