#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace cbb84 {

/// Every random draw in the library goes through a caller-owned engine of this type.
using Rng = std::mt19937_64;

/// Independent named streams derived from one run seed.
enum class Stream : std::uint64_t { Alice = 1, Bob = 2, Channel = 3 };

inline Rng make_stream(std::uint64_t seed, Stream which, std::uint64_t attempt = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(which), static_cast<std::uint32_t>(attempt),
                      static_cast<std::uint32_t>(attempt >> 32)};
    return Rng(seq);
}

// The helpers below avoid std::*_distribution so that sequences are identical
// across standard library implementations.

inline bool random_bit(Rng& rng) { return (rng() >> 63) != 0; }

inline double random_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// True with probability p; p <= 0 never fires and p >= 1 always fires.
inline bool bernoulli(Rng& rng, double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return random_unit(rng) < p;
}

/// Uniform integer in [0, bound) by rejection; bound must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

/// Fisher-Yates with uniform_index.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[uniform_index(rng, i)]);
    }
}

/// Uniformly random `count`-subset of `items`, returned in the order of `items`.
template <typename T>
std::vector<T> sample_subset(const std::vector<T>& items, std::size_t count, Rng& rng) {
    std::vector<std::size_t> idx(items.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    // Partial Fisher-Yates over the first `count` slots.
    for (std::size_t i = 0; i < count; ++i) {
        std::swap(idx[i], idx[i + uniform_index(rng, idx.size() - i)]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    std::vector<T> out;
    out.reserve(count);
    for (auto i : idx) out.push_back(items[i]);
    return out;
}

}  // namespace cbb84
