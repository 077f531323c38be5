#pragma once

// Count-Min-Sketch with pairwise-independent row hashes. Sketches created
// from the same seed share hash functions and can be merged elementwise.

#include <cstdint>
#include <span>
#include <vector>

#include "rdpforge/errors.hpp"

namespace rdpforge {

class Sketch {
public:
    // d = ceil(ln(1/delta_c)) rows, w = ceil(e/epsilon) columns.
    Sketch(double delta_c, double epsilon, uint64_t seed);

    void update(std::span<const uint8_t> key, uint64_t count);
    uint64_t query(std::span<const uint8_t> key) const;
    void merge(const Sketch& other);

    int depth() const { return d_; }
    int width() const { return w_; }
    uint64_t total() const { return total_; }
    uint64_t seed() const { return seed_; }
    const std::vector<uint64_t>& counters() const { return cells_; }

    bool compatible_with(const Sketch& other) const {
        return d_ == other.d_ && w_ == other.w_ && seed_ == other.seed_;
    }

private:
    size_t cell_index(int row, uint64_t fingerprint) const;
    static uint64_t fingerprint(std::span<const uint8_t> key);

    int d_ = 0;
    int w_ = 0;
    uint64_t seed_ = 0;
    uint64_t total_ = 0;
    std::vector<uint64_t> hash_a_, hash_b_;
    std::vector<uint64_t> cells_;  // row-major d x w
};

}  // namespace rdpforge
