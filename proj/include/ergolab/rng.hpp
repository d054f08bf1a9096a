#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace ergolab {

// Deterministic randomness primitives. Everything downstream is a pure
// function of (seed, index) or (seed, byte key); there is no global state.

// splitmix64 finalizer; full avalanche on 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Combine a seed with an index into an independent 64-bit value.
constexpr std::uint64_t mix64(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(seed ^ mix64(index + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t fnv1a64(const void* data, std::size_t len,
                                std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Stable hash of an arbitrary byte key under a seed. FNV-1a over the key,
// then a splitmix64 finalizer to repair FNV's weak low bits.
inline std::uint64_t hash_bytes(std::uint64_t seed, const void* data, std::size_t len) noexcept {
    return mix64(seed ^ fnv1a64(data, len));
}

// Named substream of a master seed (labeling / sampling / separation / ...).
// Adding a new stream name never perturbs existing streams.
inline std::uint64_t stream_seed(std::uint64_t master, std::string_view name) noexcept {
    return mix64(master ^ fnv1a64(name.data(), name.size()));
}

// Uniform double in [0,1) from 53 high bits.
constexpr double unit_double(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Minimal counter-free generator for places that want a stream of values
// from one seed (e.g. i.i.d. labeling symbols).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double next_unit() noexcept { return unit_double(next()); }

private:
    std::uint64_t state_;
};

}  // namespace ergolab
