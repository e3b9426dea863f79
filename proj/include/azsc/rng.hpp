#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace azsc {

/// Deterministic random stream. The generator is mt19937_64 (fully specified
/// by the standard), so identical seeds reproduce identical streams on every
/// platform. Derived draws below avoid std::*_distribution, whose outputs are
/// implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    /// Independent substream for (seed, shard) pairs; shards do not overlap
    /// for practical purposes because the seed is remixed through splitmix64.
    static Rng substream(uint64_t seed, uint64_t shard) {
        return Rng(splitmix64(seed ^ splitmix64(shard + 0x9E3779B97F4A7C15ULL)));
    }

    uint64_t next_u64() { return gen_(); }

    /// Uniform in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0,n), n > 0. Rejection sampling keeps it exactly uniform.
    size_t uniform_index(size_t n) {
        if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
        const auto bound = static_cast<uint64_t>(n);
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t r = next_u64();
        while (r >= limit) r = next_u64();
        return static_cast<size_t>(r % bound);
    }

    /// Uniform real in [lo, hi).
    double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Fisher-Yates; std::shuffle is implementation-defined, this is not.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    static uint64_t splitmix64(uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

private:
    std::mt19937_64 gen_;
};

} // namespace azsc
