#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace featbench {

/// One splitmix64 finalization step. Used to derive child seeds so that
/// independent random streams (per agent, per tree, per grid cell) stay
/// reproducible regardless of execution order.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a stream tag.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed + 0x9E3779B97F4A7C15ull * (stream + 1));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(seed, a), b);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
    return mix_seed(mix_seed(seed, a, b), c);
}

/// Seeded random source. All draws are built directly on the mt19937_64
/// output sequence (which the standard pins down bit-for-bit) instead of
/// std:: distributions, so results are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Standard normal via Box-Muller (two uniform draws per value).
    double next_gaussian() {
        double u1 = next_unit();
        while (u1 <= 0.0) u1 = next_unit();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Uniform index in [0, n). n must be positive.
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(gen_() % static_cast<std::uint64_t>(n));
    }

    bool next_bool(double p_true) { return next_unit() < p_true; }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = next_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct indices from [0, n), returned in ascending order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
    std::mt19937_64 gen_;
};

inline std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + next_index(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace featbench
