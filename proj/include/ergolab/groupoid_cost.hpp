#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ergolab/action.hpp"
#include "ergolab/rational.hpp"

namespace ergolab {

// (x, gamma) with the partial product (x1,g1)(x2,g2) = (x1, g1 g2) defined
// iff g1 x1 = x2. Lives over a finite quotient action.
struct GroupoidElement {
    int x = 0;
    GroupElement g;

    friend bool operator==(const GroupoidElement& a, const GroupoidElement& b) {
        return a.x == b.x && a.g == b.g;
    }
    friend bool operator<(const GroupoidElement& a, const GroupoidElement& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.g < b.g;
    }
};

inline int quotient_target(const FiniteQuotientDesc& desc, const GroupoidElement& e) {
    return detail::quotient_apply(desc, e.g, e.x);
}

inline std::optional<GroupoidElement> groupoid_product(const GroupoidElement& a,
                                                       const GroupoidElement& b,
                                                       const FiniteQuotientDesc& desc) {
    if (quotient_target(desc, a) != b.x) return std::nullopt;
    return GroupoidElement{a.x, compose(a.g, b.g)};
}

inline GroupoidElement groupoid_inverse(const GroupoidElement& a,
                                        const FiniteQuotientDesc& desc) {
    return GroupoidElement{quotient_target(desc, a), invert(a.g)};
}

// Finite subset of X x Gamma, deduplicated and canonically ordered.
class GroupoidSubset {
public:
    GroupoidSubset() = default;
    explicit GroupoidSubset(std::vector<GroupoidElement> elems) : elems_(std::move(elems)) {
        std::sort(elems_.begin(), elems_.end());
        elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
    }

    const std::vector<GroupoidElement>& elements() const { return elems_; }
    std::size_t size() const { return elems_.size(); }
    bool contains(const GroupoidElement& e) const {
        return std::binary_search(elems_.begin(), elems_.end(), e);
    }
    auto begin() const { return elems_.begin(); }
    auto end() const { return elems_.end(); }

    // mu~(A) = sum over elements of the weight of the source point
    // (counting measure on Gamma, quotient weights on X); exact.
    Rational measure(const FiniteQuotientDesc& desc) const {
        Rational total(0);
        for (const auto& e : elems_) total = total + desc.weights[static_cast<std::size_t>(e.x)];
        return total;
    }

    friend bool operator==(const GroupoidSubset& a, const GroupoidSubset& b) {
        return a.elems_ == b.elems_;
    }

private:
    std::vector<GroupoidElement> elems_;
};

inline GroupoidSubset identity_subset(const FiniteQuotientDesc& desc) {
    std::vector<GroupoidElement> elems;
    for (int x = 0; x < desc.size; ++x)
        elems.push_back({x, GroupElement::identity(desc.family)});
    return GroupoidSubset(std::move(elems));
}

inline GroupoidSubset full_column_subset(const FiniteQuotientDesc& desc, const FiniteSubset& S) {
    std::vector<GroupoidElement> elems;
    for (int x = 0; x < desc.size; ++x)
        for (const auto& g : S) elems.push_back({x, g});
    return GroupoidSubset(std::move(elems));
}

// All elements of X x ball(radius_cap) reachable as finite products of
// A, A^-1 and E. Intermediate words are truncated at the cap, so the
// result can under-approximate the true closure; every element returned
// is a genuine product.
inline GroupoidSubset groupoid_closure(const GroupoidSubset& A, const FiniteQuotientDesc& desc,
                                       int radius_cap) {
    if (radius_cap < 1) throw ConfigError("closure radius cap must be >= 1");
    FiniteSubset words = ball(desc.family, radius_cap);
    std::unordered_map<GroupElement, int, GroupElementHash> word_index;
    for (std::size_t i = 0; i < words.size(); ++i)
        word_index[words[i]] = static_cast<int>(i);

    std::vector<GroupoidElement> basis;
    for (int x = 0; x < desc.size; ++x)
        basis.push_back({x, GroupElement::identity(desc.family)});
    for (const auto& e : A) {
        if (e.g.length() <= radius_cap) basis.push_back(e);
        GroupoidElement inv = groupoid_inverse(e, desc);
        if (inv.g.length() <= radius_cap) basis.push_back(inv);
    }

    std::vector<std::vector<char>> reached(
        static_cast<std::size_t>(desc.size),
        std::vector<char>(words.size(), 0));
    std::deque<GroupoidElement> queue;
    auto push = [&](const GroupoidElement& e) {
        auto it = word_index.find(e.g);
        if (it == word_index.end()) return;
        auto& slot = reached[static_cast<std::size_t>(e.x)][static_cast<std::size_t>(it->second)];
        if (!slot) {
            slot = 1;
            queue.push_back(e);
        }
    };
    for (const auto& e : basis) push(e);
    while (!queue.empty()) {
        GroupoidElement cur = queue.front();
        queue.pop_front();
        int target = quotient_target(desc, cur);
        for (const auto& b : basis) {
            if (b.x != target) continue;
            GroupElement combined = compose(cur.g, b.g);
            if (combined.length() <= radius_cap) push({cur.x, combined});
        }
    }

    std::vector<GroupoidElement> out;
    for (int x = 0; x < desc.size; ++x)
        for (std::size_t w = 0; w < words.size(); ++w)
            if (reached[static_cast<std::size_t>(x)][w]) out.push_back({x, words[w]});
    return GroupoidSubset(std::move(out));
}

enum class GenerationStatus { Yes, No, Unknown };

inline std::string to_string(GenerationStatus s) {
    switch (s) {
        case GenerationStatus::Yes: return "yes";
        case GenerationStatus::No: return "no";
        default: return "unknown";
    }
}

struct GenerationResult {
    GenerationStatus status = GenerationStatus::Unknown;
    std::optional<GroupoidElement> witness;  // unreachable element for No
};

namespace detail {

// Undirected reachability structure of the edge set A over the quotient:
// components, integer potentials, and the gcd of cycle sums (Z only).
struct OrbitGraph {
    std::vector<int> comp;          // component id per vertex
    std::vector<std::int64_t> pot;  // walk sum from the component root
    std::vector<std::int64_t> cycle_gcd;  // per component; 0 = no cycles
};

inline OrbitGraph build_orbit_graph(const GroupoidSubset& A, const FiniteQuotientDesc& desc) {
    struct Edge {
        int to;
        std::int64_t label;
    };
    std::vector<std::vector<Edge>> adj(static_cast<std::size_t>(desc.size));
    for (const auto& e : A) {
        if (e.g.is_identity()) continue;
        int tgt = quotient_target(desc, e);
        std::int64_t label = e.g.z_value();
        adj[static_cast<std::size_t>(e.x)].push_back({tgt, label});
        adj[static_cast<std::size_t>(tgt)].push_back({e.x, -label});
    }
    OrbitGraph g;
    g.comp.assign(static_cast<std::size_t>(desc.size), -1);
    g.pot.assign(static_cast<std::size_t>(desc.size), 0);
    for (int root = 0; root < desc.size; ++root) {
        if (g.comp[static_cast<std::size_t>(root)] >= 0) continue;
        int cid = static_cast<int>(g.cycle_gcd.size());
        g.cycle_gcd.push_back(0);
        g.comp[static_cast<std::size_t>(root)] = cid;
        std::deque<int> queue{root};
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (const auto& edge : adj[static_cast<std::size_t>(u)]) {
                std::int64_t through = g.pot[static_cast<std::size_t>(u)] + edge.label;
                if (g.comp[static_cast<std::size_t>(edge.to)] < 0) {
                    g.comp[static_cast<std::size_t>(edge.to)] = cid;
                    g.pot[static_cast<std::size_t>(edge.to)] = through;
                    queue.push_back(edge.to);
                } else {
                    std::int64_t cycle = through - g.pot[static_cast<std::size_t>(edge.to)];
                    g.cycle_gcd[static_cast<std::size_t>(cid)] =
                        std::gcd(g.cycle_gcd[static_cast<std::size_t>(cid)],
                                 cycle < 0 ? -cycle : cycle);
                }
            }
        }
    }
    return g;
}

// Exact unreachability witness for Z-quotients. (x, n) is a product of
// A u A^-1 u E iff pi^n(x) lies in x's component and n is congruent to
// the potential difference modulo the component's cycle gcd.
inline std::optional<GroupoidElement> z_unreachable_witness(const GroupoidSubset& A,
                                                            const FiniteQuotientDesc& desc) {
    OrbitGraph g = build_orbit_graph(A, desc);
    for (int x = 0; x < desc.size; ++x) {
        // orbit period of x under the +1 generator
        int period = 0;
        int y = x;
        do {
            y = desc.generator_perms[0][static_cast<std::size_t>(y)];
            ++period;
        } while (y != x);

        std::int64_t d = g.cycle_gcd[static_cast<std::size_t>(g.comp[static_cast<std::size_t>(x)])];
        std::int64_t horizon;
        if (d > 0) {
            horizon = std::lcm<std::int64_t>(period, d);
        } else {
            // no cycles: only finitely many sums are realizable
            std::int64_t max_pot = 0;
            for (int v = 0; v < desc.size; ++v)
                max_pot = std::max<std::int64_t>(max_pot,
                                                 std::llabs(g.pot[static_cast<std::size_t>(v)]));
            horizon = 2 * max_pot + period + 1;
        }
        int target = x;
        for (std::int64_t n = 1; n <= horizon; ++n) {
            target = desc.generator_perms[0][static_cast<std::size_t>(target)];
            bool ok;
            if (g.comp[static_cast<std::size_t>(target)] != g.comp[static_cast<std::size_t>(x)]) {
                ok = false;
            } else {
                std::int64_t diff = n - (g.pot[static_cast<std::size_t>(target)] -
                                         g.pot[static_cast<std::size_t>(x)]);
                ok = d > 0 ? diff % d == 0 : diff == 0;
            }
            if (!ok) return GroupoidElement{x, GroupElement::z(n)};
        }
    }
    return std::nullopt;
}

// Disconnection witness for any family: an element (x, w) whose target
// lies outside x's A-component can never be a product.
inline std::optional<GroupoidElement> disconnection_witness(const GroupoidSubset& A,
                                                            const FiniteQuotientDesc& desc) {
    OrbitGraph g = build_orbit_graph(A, desc);
    std::vector<GroupElement> gens;
    if (desc.family == GroupFamily::F2) {
        gens = {GroupElement::f2("a"), GroupElement::f2("b")};
    } else {
        for (int i = 0; i < lattice_dim(desc.family); ++i) {
            std::array<std::int64_t, 3> c{0, 0, 0};
            c[static_cast<std::size_t>(i)] = 1;
            gens.push_back(desc.family == GroupFamily::Z    ? GroupElement::z(1)
                           : desc.family == GroupFamily::Z2 ? GroupElement::z2(c[0], c[1])
                                                            : GroupElement::z3(c[0], c[1], c[2]));
        }
    }
    for (int x = 0; x < desc.size; ++x) {
        // BFS over the full orbit of x, tracking a word per vertex
        std::vector<char> seen(static_cast<std::size_t>(desc.size), 0);
        std::deque<std::pair<int, GroupElement>> queue{{x, GroupElement::identity(desc.family)}};
        seen[static_cast<std::size_t>(x)] = 1;
        while (!queue.empty()) {
            auto [v, word] = queue.front();
            queue.pop_front();
            if (g.comp[static_cast<std::size_t>(v)] != g.comp[static_cast<std::size_t>(x)])
                return GroupoidElement{x, word};
            for (const auto& gen : gens) {
                int to = quotient_apply(desc, gen, v);
                if (!seen[static_cast<std::size_t>(to)]) {
                    seen[static_cast<std::size_t>(to)] = 1;
                    queue.push_back({to, compose(gen, word)});
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace detail

// Yes when X x S is contained in the capped closure (certified by genuine
// products); No with an unreachable witness from the combinatorial
// analysis; Unknown otherwise (cap too small to certify).
inline GenerationResult generates(const GroupoidSubset& A, const FiniteQuotientDesc& desc,
                                  const FiniteSubset& S, int radius_cap) {
    GroupoidSubset closure = groupoid_closure(A, desc, radius_cap);
    bool all = true;
    for (int x = 0; x < desc.size && all; ++x)
        for (const auto& s : S) {
            if (s.length() > radius_cap) throw ConfigError("S exceeds the closure radius cap");
            if (!closure.contains({x, s})) {
                all = false;
                break;
            }
        }
    if (all) return {GenerationStatus::Yes, std::nullopt};
    if (desc.family == GroupFamily::Z) {
        auto witness = detail::z_unreachable_witness(A, desc);
        if (witness) return {GenerationStatus::No, witness};
        return {GenerationStatus::Unknown, std::nullopt};
    }
    auto witness = detail::disconnection_witness(A, desc);
    if (witness) return {GenerationStatus::No, witness};
    return {GenerationStatus::Unknown, std::nullopt};
}

enum class GcostMode { Exact, Greedy };

struct GreedyStep {
    GroupoidElement elem;
    bool removed = false;
};

struct GcostReport {
    GcostMode mode = GcostMode::Exact;
    Rational best_value;
    GroupoidSubset best_subset;
    int exact_radius = 1;
    int radius_cap = 8;
    std::int64_t subsets_examined = 0;
    std::int64_t subsets_generating = 0;
    std::int64_t subsets_unknown = 0;
    std::vector<GreedyStep> greedy_trace;
};

inline constexpr int kExactSearchBudget = 24;

// Minimal mu~ over generating subsets. Exact mode enumerates all subsets
// of X x (ball(exact_radius) \ {e}); greedy starts from X x S and deletes
// elements in canonical order while generation is preserved.
inline GcostReport gcost_search(const FiniteQuotientDesc& desc, const FiniteSubset& S,
                                GcostMode mode, int exact_radius = 1, int radius_cap = 8) {
    GcostReport report;
    report.mode = mode;
    report.exact_radius = exact_radius;
    report.radius_cap = radius_cap;

    if (mode == GcostMode::Greedy) {
        std::vector<GroupoidElement> current;
        for (int x = 0; x < desc.size; ++x)
            for (const auto& s : S) current.push_back({x, s});
        GroupoidSubset working(current);
        if (generates(working, desc, S, radius_cap).status != GenerationStatus::Yes)
            throw ConfigError("X x S fails to certify generation at this radius cap");
        GroupoidSubset deletion_order(current);
        for (const auto& elem : deletion_order.elements()) {
            std::vector<GroupoidElement> trimmed;
            for (const auto& e : working)
                if (!(e == elem)) trimmed.push_back(e);
            GroupoidSubset candidate(trimmed);
            bool ok = generates(candidate, desc, S, radius_cap).status == GenerationStatus::Yes;
            report.greedy_trace.push_back({elem, ok});
            if (ok) working = std::move(candidate);
        }
        report.best_subset = working;
        report.best_value = working.measure(desc);
        return report;
    }

    FiniteSubset r_ball = ball(desc.family, exact_radius);
    if (static_cast<std::int64_t>(desc.size) * static_cast<std::int64_t>(r_ball.size()) >
        kExactSearchBudget)
        throw BudgetExceeded("exact gcost search limited to |X|*|ball(r)| <= 24");
    std::vector<GroupoidElement> ground;
    for (int x = 0; x < desc.size; ++x)
        for (const auto& g : r_ball)
            if (!g.is_identity()) ground.push_back({x, g});
    std::sort(ground.begin(), ground.end());

    bool found = false;
    Rational best(0);
    GroupoidSubset best_subset;
    std::uint64_t n_masks = std::uint64_t(1) << ground.size();
    for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
        std::vector<GroupoidElement> elems;
        Rational value(0);
        for (std::size_t b = 0; b < ground.size(); ++b)
            if (mask & (std::uint64_t(1) << b)) {
                elems.push_back(ground[b]);
                value = value + desc.weights[static_cast<std::size_t>(ground[b].x)];
            }
        if (found && !(value < best)) continue;
        ++report.subsets_examined;
        GroupoidSubset candidate(std::move(elems));
        auto res = generates(candidate, desc, S, radius_cap);
        if (res.status == GenerationStatus::Unknown) ++report.subsets_unknown;
        if (res.status != GenerationStatus::Yes) continue;
        ++report.subsets_generating;
        if (!found || value < best) {
            found = true;
            best = value;
            best_subset = std::move(candidate);
        }
    }
    if (!found) throw ConfigError("no generating subset within the exact search ground set");
    report.best_value = best;
    report.best_subset = best_subset;
    return report;
}

struct FactorReport {
    Rational gcost_fine;
    Rational gcost_coarse;
    bool holds = false;  // gcost(fine) <= gcost(coarse)
};

// Checks that the given map is an equivariant measure-preserving factor map
// and that gcost is monotone along it (finer action has the smaller cost).
inline FactorReport monotonicity_check(const FiniteQuotientDesc& fine,
                                       const FiniteQuotientDesc& coarse,
                                       const std::vector<int>& factor_map, const FiniteSubset& S,
                                       int exact_radius = 1, int radius_cap = 8) {
    if (fine.family != coarse.family) throw GroupMismatch("factor map across group families");
    if (static_cast<int>(factor_map.size()) != fine.size)
        throw ShapeMismatch("factor map length must equal |X_fine|");
    for (int v : factor_map)
        if (v < 0 || v >= coarse.size) throw ShapeMismatch("factor map value out of range");

    for (std::size_t gen = 0; gen < fine.generator_perms.size(); ++gen)
        for (int x = 0; x < fine.size; ++x) {
            int lhs = factor_map[static_cast<std::size_t>(
                fine.generator_perms[gen][static_cast<std::size_t>(x)])];
            int rhs = coarse.generator_perms[gen][static_cast<std::size_t>(
                factor_map[static_cast<std::size_t>(x)])];
            if (lhs != rhs)
                throw NotEquivariant("factor map does not intertwine generator " +
                                     std::to_string(gen));
        }
    for (int y = 0; y < coarse.size; ++y) {
        Rational fiber(0);
        for (int x = 0; x < fine.size; ++x)
            if (factor_map[static_cast<std::size_t>(x)] == y)
                fiber = fiber + fine.weights[static_cast<std::size_t>(x)];
        if (!(fiber == coarse.weights[static_cast<std::size_t>(y)]))
            throw NotMeasurePreserving("fiber over " + std::to_string(y) +
                                       " has measure " + fiber.to_string());
    }

    FactorReport report;
    report.gcost_fine = gcost_search(fine, S, GcostMode::Exact, exact_radius, radius_cap).best_value;
    report.gcost_coarse =
        gcost_search(coarse, S, GcostMode::Exact, exact_radius, radius_cap).best_value;
    report.holds = report.gcost_fine <= report.gcost_coarse;
    if (!report.holds)
        throw MonotonicityViolation("gcost(fine) " + report.gcost_fine.to_string() +
                                    " > gcost(coarse) " + report.gcost_coarse.to_string());
    return report;
}

}  // namespace ergolab
