#include "rdpforge/cms.hpp"

#include <cmath>
#include <limits>

#include "rdpforge/rng.hpp"

namespace rdpforge {

namespace {

constexpr uint64_t kMersenne61 = (1ull << 61) - 1;

uint64_t mulmod61(uint64_t a, uint64_t b) {
    __uint128_t p = static_cast<__uint128_t>(a) * b;
    uint64_t lo = static_cast<uint64_t>(p & kMersenne61);
    uint64_t hi = static_cast<uint64_t>(p >> 61);
    uint64_t r = lo + hi;
    if (r >= kMersenne61) r -= kMersenne61;
    return r;
}

}  // namespace

Sketch::Sketch(double delta_c, double epsilon, uint64_t seed) : seed_(seed) {
    if (!(delta_c > 0.0 && delta_c < 1.0)) throw UsageError("sketch: delta_c must be in (0,1)");
    if (!(epsilon > 0.0)) throw UsageError("sketch: epsilon must be positive");
    d_ = static_cast<int>(std::ceil(std::log(1.0 / delta_c)));
    if (d_ < 1) d_ = 1;
    double w = std::ceil(std::exp(1.0) / epsilon);
    if (w > 1e9) throw UsageError("sketch: epsilon too small, width would exceed 1e9");
    w_ = static_cast<int>(w);
    if (w_ < 1) w_ = 1;
    cells_.assign(static_cast<size_t>(d_) * w_, 0);
    hash_a_.resize(d_);
    hash_b_.resize(d_);
    Rng rng(derive_seed(seed, 0x434d53ull));
    for (int j = 0; j < d_; ++j) {
        hash_a_[j] = 1 + rng.next() % (kMersenne61 - 1);
        hash_b_[j] = rng.next() % kMersenne61;
    }
}

uint64_t Sketch::fingerprint(std::span<const uint8_t> key) {
    // FNV-1a folded into the Mersenne field
    uint64_t h = 0xcbf29ce484222325ull;
    for (uint8_t byte : key) {
        h ^= byte;
        h *= 0x100000001b3ull;
    }
    return h % kMersenne61;
}

size_t Sketch::cell_index(int row, uint64_t fp) const {
    uint64_t v = mulmod61(hash_a_[row], fp);
    v += hash_b_[row];
    if (v >= kMersenne61) v -= kMersenne61;
    return static_cast<size_t>(row) * w_ + v % w_;
}

void Sketch::update(std::span<const uint8_t> key, uint64_t count) {
    if (count == 0) throw UsageError("sketch update: count must be positive");
    uint64_t fp = fingerprint(key);
    for (int j = 0; j < d_; ++j) cells_[cell_index(j, fp)] += count;
    total_ += count;
}

uint64_t Sketch::query(std::span<const uint8_t> key) const {
    uint64_t fp = fingerprint(key);
    uint64_t best = std::numeric_limits<uint64_t>::max();
    for (int j = 0; j < d_; ++j) best = std::min(best, cells_[cell_index(j, fp)]);
    return best;
}

void Sketch::merge(const Sketch& other) {
    if (!compatible_with(other))
        throw IncompatibleError("sketch merge: dimensions or hash seeds differ");
    for (size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
    total_ += other.total_;
}

}  // namespace rdpforge
