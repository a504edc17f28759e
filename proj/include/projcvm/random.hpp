#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "projcvm/types.hpp"

namespace projcvm {

// Seedable stream of variates with deterministic substream derivation.
// substream(i) hashes (seed, i) into a fresh stream, so parallel tasks can
// each own an independent stream that does not depend on scheduling order.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(mix(mix(seed) + 0x1d8e4e27c47d124full)) {}

    std::uint64_t seed() const { return seed_; }

    RandomStream substream(std::uint64_t index) const {
        return RandomStream(mix(mix(seed_) + mix(index + 0x9e3779b97f4a7c15ull)));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, n).
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    double gaussian() { return normal_(engine_); }

    double cauchy(double location, double scale) {
        std::cauchy_distribution<double> dist(location, scale);
        return dist(engine_);
    }

    double chi_squared(double df) {
        std::chi_squared_distribution<double> dist(df);
        return dist(engine_);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_below(i)]);
        }
    }

    // Identity permutation of [0, n) shuffled in place.
    std::vector<Index> permutation(Index n) {
        std::vector<Index> idx(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
        shuffle(idx);
        return idx;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace projcvm
