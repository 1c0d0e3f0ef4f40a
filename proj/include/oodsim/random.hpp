#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string_view>
#include <vector>

namespace oodsim {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

inline constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                       std::uint64_t hash = kFnvOffset) noexcept {
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

/// Derives a sub-seed for one (name, role) purpose from a master seed.
///
/// The hash is FNV-1a over the little-endian bytes of the master seed, a NUL,
/// the name, a NUL and the role, finalized with splitmix64. Adding or removing
/// other names never changes the seed derived for an existing one.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view name,
                                 std::string_view role) noexcept {
    char raw[8];
    for (int i = 0; i < 8; ++i) raw[i] = static_cast<char>((master >> (8 * i)) & 0xff);
    std::uint64_t h = fnv1a64(std::string_view(raw, 8));
    h = fnv1a64(std::string_view("\0", 1), h);
    h = fnv1a64(name, h);
    h = fnv1a64(std::string_view("\0", 1), h);
    h = fnv1a64(role, h);
    return splitmix64(h);
}

/// Platform-stable random source.
///
/// std::mt19937_64 has a standardized output sequence, but the standard
/// distributions do not, so bounded integers and unit reals are derived here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    /// Uniform real in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::mt19937_64 engine_;
};

/// Draws k distinct indices from [0, n) uniformly, returned in ascending order.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

} // namespace oodsim
