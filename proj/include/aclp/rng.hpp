#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "aclp/error.hpp"

namespace aclp {

// Seeded generator with explicit value derivations. std::mt19937_64 has a
// portable output sequence; the helpers below avoid the standard library's
// distribution objects (their algorithms are unspecified) so sampled values
// are identical across toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw DataError("uniform_int: empty range");
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Index sampled proportionally to weights (need not be normalized).
    std::size_t categorical(const double* weights, std::size_t k) {
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) total += weights[i];
        if (total <= 0.0) throw DataError("categorical: nonpositive weight sum");
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return k - 1;
    }

    std::size_t categorical(const std::vector<double>& weights) {
        return categorical(weights.data(), weights.size());
    }

    // Independent stream for a subtask. Splitting keeps per-repeat streams
    // stable no matter how much randomness other subtasks consume.
    Rng split(std::uint64_t salt) const { return Rng(mix(seed_ ^ mix(salt))); }

  private:
    static std::uint64_t mix(std::uint64_t x) {
        // splitmix64 finalizer
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace aclp
