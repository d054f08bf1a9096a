#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "ergolab/errors.hpp"

namespace ergolab {

// Supported group families: Z, Z^2, Z^3 and the free group on two
// generators. Config names: "Z", "Z2", "Z3", "F2".
enum class GroupFamily : std::uint8_t { Z, Z2, Z3, F2 };

inline int lattice_dim(GroupFamily f) {
    switch (f) {
        case GroupFamily::Z: return 1;
        case GroupFamily::Z2: return 2;
        case GroupFamily::Z3: return 3;
        default: return 0;
    }
}

inline std::string family_name(GroupFamily f) {
    switch (f) {
        case GroupFamily::Z: return "Z";
        case GroupFamily::Z2: return "Z2";
        case GroupFamily::Z3: return "Z3";
        case GroupFamily::F2: return "F2";
    }
    return "?";
}

inline GroupFamily parse_family(std::string_view s) {
    if (s == "Z") return GroupFamily::Z;
    if (s == "Z2") return GroupFamily::Z2;
    if (s == "Z3") return GroupFamily::Z3;
    if (s == "F2") return GroupFamily::F2;
    throw ConfigError("unknown group family: " + std::string(s));
}

// A canonical group word. Lattice elements are integer vectors; F2 elements
// are freely reduced words over {a, A, b, B} (capital = inverse). Canonical
// form is unique, so equality is plain field equality.
class GroupElement {
public:
    GroupElement() : family_(GroupFamily::Z) {}

    static GroupElement identity(GroupFamily f) {
        GroupElement g;
        g.family_ = f;
        return g;
    }
    static GroupElement z(std::int64_t n) {
        GroupElement g;
        g.family_ = GroupFamily::Z;
        g.coords_[0] = n;
        return g;
    }
    static GroupElement z2(std::int64_t x, std::int64_t y) {
        GroupElement g;
        g.family_ = GroupFamily::Z2;
        g.coords_ = {x, y, 0};
        return g;
    }
    static GroupElement z3(std::int64_t x, std::int64_t y, std::int64_t z) {
        GroupElement g;
        g.family_ = GroupFamily::Z3;
        g.coords_ = {x, y, z};
        return g;
    }
    // Accepts any word over {a,A,b,B}; reduces eagerly.
    static GroupElement f2(std::string_view word) {
        GroupElement g;
        g.family_ = GroupFamily::F2;
        for (char c : word) g.push_letter(c);
        return g;
    }

    GroupFamily family() const { return family_; }
    bool is_identity() const {
        return family_ == GroupFamily::F2 ? word_.empty()
                                          : coords_ == std::array<std::int64_t, 3>{0, 0, 0};
    }
    std::int64_t z_value() const { return coords_[0]; }
    const std::array<std::int64_t, 3>& coords() const { return coords_; }
    const std::string& word() const { return word_; }

    // Word length w.r.t. the standard generators.
    std::int64_t length() const {
        if (family_ == GroupFamily::F2) return static_cast<std::int64_t>(word_.size());
        std::int64_t n = 0;
        for (int i = 0; i < lattice_dim(family_); ++i) n += std::llabs(coords_[i]);
        return n;
    }

    friend bool operator==(const GroupElement& a, const GroupElement& b) {
        return a.family_ == b.family_ && a.coords_ == b.coords_ && a.word_ == b.word_;
    }
    friend bool operator!=(const GroupElement& a, const GroupElement& b) { return !(a == b); }

    // Deterministic total order: word length, then payload bytes.
    friend bool operator<(const GroupElement& a, const GroupElement& b) {
        if (a.length() != b.length()) return a.length() < b.length();
        if (a.family_ == GroupFamily::F2) return a.word_ < b.word_;
        return a.coords_ < b.coords_;
    }

    // Canonical byte encoding; feeds the symbolic-coordinate hash.
    std::string canonical_bytes() const {
        std::string out;
        if (family_ == GroupFamily::F2) {
            out = word_;
        } else {
            out.resize(8 * static_cast<std::size_t>(lattice_dim(family_)));
            for (int i = 0; i < lattice_dim(family_); ++i) {
                auto v = static_cast<std::uint64_t>(coords_[i]);
                for (int b = 0; b < 8; ++b)
                    out[static_cast<std::size_t>(8 * i + b)] =
                        static_cast<char>((v >> (8 * b)) & 0xff);
            }
        }
        return out;
    }

    std::string to_string() const {
        switch (family_) {
            case GroupFamily::Z: return std::to_string(coords_[0]);
            case GroupFamily::Z2:
                return "(" + std::to_string(coords_[0]) + "," + std::to_string(coords_[1]) + ")";
            case GroupFamily::Z3:
                return "(" + std::to_string(coords_[0]) + "," + std::to_string(coords_[1]) + "," +
                       std::to_string(coords_[2]) + ")";
            case GroupFamily::F2: return word_.empty() ? "e" : word_;
        }
        return "?";
    }

    static GroupElement parse(GroupFamily f, const std::string& s) {
        switch (f) {
            case GroupFamily::Z: return z(std::stoll(s));
            case GroupFamily::Z2:
            case GroupFamily::Z3: {
                std::array<std::int64_t, 3> c{0, 0, 0};
                std::size_t pos = s.front() == '(' ? 1 : 0;
                for (int i = 0; i < lattice_dim(f); ++i) {
                    std::size_t used = 0;
                    c[static_cast<std::size_t>(i)] = std::stoll(s.substr(pos), &used);
                    pos += used + 1;
                }
                return f == GroupFamily::Z2 ? z2(c[0], c[1]) : z3(c[0], c[1], c[2]);
            }
            case GroupFamily::F2: return s == "e" ? identity(f) : f2(s);
        }
        throw ConfigError("bad group element: " + s);
    }

private:
    friend GroupElement compose(const GroupElement&, const GroupElement&);
    friend GroupElement invert(const GroupElement&);

    void push_letter(char c) {
        if (c != 'a' && c != 'A' && c != 'b' && c != 'B')
            throw ConfigError(std::string("bad F2 letter: ") + c);
        if (!word_.empty() && word_.back() == inverse_letter(c))
            word_.pop_back();
        else
            word_.push_back(c);
    }
    static char inverse_letter(char c) {
        switch (c) {
            case 'a': return 'A';
            case 'A': return 'a';
            case 'b': return 'B';
            default: return 'b';
        }
    }

    GroupFamily family_;
    std::array<std::int64_t, 3> coords_{0, 0, 0};
    std::string word_;
};

inline void require_same_family(const GroupElement& a, const GroupElement& b) {
    if (a.family() != b.family())
        throw GroupMismatch("elements from " + family_name(a.family()) + " and " +
                            family_name(b.family()));
}

inline GroupElement compose(const GroupElement& a, const GroupElement& b) {
    require_same_family(a, b);
    if (a.family() == GroupFamily::F2) {
        GroupElement r = a;
        for (char c : b.word_) r.push_letter(c);
        return r;
    }
    GroupElement r = a;
    for (int i = 0; i < lattice_dim(a.family()); ++i) r.coords_[static_cast<std::size_t>(i)] += b.coords_[static_cast<std::size_t>(i)];
    return r;
}

inline GroupElement invert(const GroupElement& a) {
    if (a.family() == GroupFamily::F2) {
        GroupElement r = GroupElement::identity(GroupFamily::F2);
        for (auto it = a.word_.rbegin(); it != a.word_.rend(); ++it)
            r.word_.push_back(GroupElement::inverse_letter(*it));
        return r;
    }
    GroupElement r = a;
    for (auto& c : r.coords_) c = -c;
    return r;
}

struct GroupElementHash {
    std::size_t operator()(const GroupElement& g) const noexcept {
        std::size_t h = static_cast<std::size_t>(g.family());
        if (g.family() == GroupFamily::F2) {
            for (char c : g.word()) h = h * 1099511628211ULL + static_cast<std::size_t>(c);
        } else {
            for (auto v : g.coords()) h = h * 1099511628211ULL + static_cast<std::size_t>(v);
        }
        return h;
    }
};

// Deduplicated, canonically ordered finite set of group elements.
class FiniteSubset {
public:
    FiniteSubset() = default;
    explicit FiniteSubset(std::vector<GroupElement> elems) : elems_(std::move(elems)) {
        for (std::size_t i = 1; i < elems_.size(); ++i) require_same_family(elems_[0], elems_[i]);
        std::sort(elems_.begin(), elems_.end());
        elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
    }

    const std::vector<GroupElement>& elements() const { return elems_; }
    std::size_t size() const { return elems_.size(); }
    bool empty() const { return elems_.empty(); }
    const GroupElement& operator[](std::size_t i) const { return elems_[i]; }
    auto begin() const { return elems_.begin(); }
    auto end() const { return elems_.end(); }
    bool contains(const GroupElement& g) const {
        return std::binary_search(elems_.begin(), elems_.end(), g);
    }
    GroupFamily family() const {
        if (elems_.empty()) throw ShapeMismatch("family of empty subset");
        return elems_[0].family();
    }

    friend bool operator==(const FiniteSubset& a, const FiniteSubset& b) {
        return a.elems_ == b.elems_;
    }

private:
    std::vector<GroupElement> elems_;
};

// Ball of the given word-length radius w.r.t. the standard generators
// (Z: +-1, Z^d: +-e_i, F2: a,A,b,B).
inline FiniteSubset ball(GroupFamily family, int radius) {
    std::vector<GroupElement> out;
    if (family == GroupFamily::F2) {
        // BFS over reduced words: appending any letter other than the inverse
        // of the last one yields a new reduced word.
        std::deque<GroupElement> frontier{GroupElement::identity(family)};
        out.push_back(frontier.front());
        for (int r = 0; r < radius; ++r) {
            std::deque<GroupElement> next;
            for (const auto& w : frontier) {
                for (char c : {'a', 'A', 'b', 'B'}) {
                    GroupElement ext = compose(w, GroupElement::f2(std::string_view(&c, 1)));
                    if (ext.length() == w.length() + 1) {
                        next.push_back(ext);
                        out.push_back(ext);
                    }
                }
            }
            frontier = std::move(next);
        }
    } else if (family == GroupFamily::Z) {
        for (std::int64_t n = -radius; n <= radius; ++n) out.push_back(GroupElement::z(n));
    } else {
        int d = lattice_dim(family);
        std::int64_t r = radius;
        for (std::int64_t x = -r; x <= r; ++x)
            for (std::int64_t y = -r + std::llabs(x); y <= r - std::llabs(x); ++y) {
                if (d == 2) {
                    out.push_back(GroupElement::z2(x, y));
                } else {
                    std::int64_t rem = r - std::llabs(x) - std::llabs(y);
                    for (std::int64_t z = -rem; z <= rem; ++z)
                        out.push_back(GroupElement::z3(x, y, z));
                }
            }
    }
    return FiniteSubset(std::move(out));
}

// {t*s : t in T, s in S}.
inline FiniteSubset product_set(const FiniteSubset& T, const FiniteSubset& S) {
    std::vector<GroupElement> out;
    out.reserve(T.size() * S.size());
    for (const auto& t : T)
        for (const auto& s : S) out.push_back(compose(t, s));
    return FiniteSubset(std::move(out));
}

}  // namespace ergolab
