#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "symq/error.hpp"

namespace symq {

// xoshiro256++ seeded through splitmix64. Deterministic under seed: two
// generators built from the same seed emit identical sequences. Single-owner;
// never share one instance between concurrent tasks.
class Rng {
  public:
    explicit Rng(uint64_t seed = 0) : seed_(seed) {
        uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    uint64_t seed() const { return seed_; }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n). n must be positive.
    uint64_t uniform_int(uint64_t n) {
        if (n == 0) throw DomainError("uniform_int: n must be positive");
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal via Box-Muller; consumes exactly two uniforms per draw.
    double normal() {
        double u1 = uniform();
        const double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Index k with probability weights[k] / sum(weights). Weights must be
    // non-negative with a positive sum.
    size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw DomainError("categorical: weights must have positive sum");
        double u = uniform() * total;
        for (size_t k = 0; k + 1 < weights.size(); ++k) {
            u -= weights[k];
            if (u < 0.0) return k;
        }
        return weights.size() - 1;
    }

    // M distinct indices from {0..n-1}, uniform over size-M subsets
    // (partial Fisher-Yates).
    std::vector<int> sample_indices(int n, int m) {
        if (m < 1 || m > n) throw DomainError("sample_indices: need 1 <= m <= n");
        std::vector<int> pool(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
        for (int i = 0; i < m; ++i) {
            const auto j = i + static_cast<int>(uniform_int(static_cast<uint64_t>(n - i)));
            std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
        }
        pool.resize(static_cast<size_t>(m));
        return pool;
    }

    // Deterministically derives an independent generator for a named stream.
    // Used to isolate concerns (env, policy, batch, subset, noise, ...) so
    // toggling one consumer does not perturb the others.
    static Rng derive(uint64_t seed, uint64_t stream) {
        uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        x = splitmix64(x);
        return Rng(x ^ splitmix64(x));
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t seed_;
    uint64_t state_[4];
};

// Stable stream tags for Rng::derive.
namespace stream {
inline constexpr uint64_t kEnv = 1;
inline constexpr uint64_t kPolicy = 2;
inline constexpr uint64_t kBatch = 3;
inline constexpr uint64_t kSubset = 4;
inline constexpr uint64_t kNoise = 5;
inline constexpr uint64_t kInit = 6;
inline constexpr uint64_t kEval = 7;
} // namespace stream

} // namespace symq
