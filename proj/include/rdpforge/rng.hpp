#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "rdpforge/errors.hpp"

namespace rdpforge {

// splitmix64 step; used to derive independent stream seeds from a master seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 0x632be59bd9b4e019ull));
}

// Deterministic RNG wrapper. Distribution sampling is implemented here rather
// than with std:: distributions, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    int uniform_int(int n) {
        if (n <= 0) throw UsageError("uniform_int: n must be positive");
        // rejection sampling to avoid modulo bias
        uint64_t bound = ~0ull - (~0ull % static_cast<uint64_t>(n));
        uint64_t v;
        do {
            v = engine_();
        } while (v >= bound);
        return static_cast<int>(v % static_cast<uint64_t>(n));
    }

    // Sample an index proportionally to the given non-negative weights.
    int sample(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (total <= 0.0) throw UsageError("sample: weights must have positive sum");
        double u = uniform01() * total;
        double acc = 0.0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size() - 1);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace rdpforge
