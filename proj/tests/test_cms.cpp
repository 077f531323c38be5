#include <doctest.h>

#include <map>
#include <string>

#include "rdpforge/cms.hpp"
#include "rdpforge/rng.hpp"

using namespace rdpforge;

namespace {

std::vector<uint8_t> key_of(const std::string& s) {
    return std::vector<uint8_t>(s.begin(), s.end());
}

}  // namespace

TEST_CASE("sketch dimensions follow the ceiling formulas") {
    Sketch s(0.01, 0.1, 1);
    CHECK(s.depth() == 5);   // ceil(ln 100)
    CHECK(s.width() == 28);  // ceil(e / 0.1)
    CHECK(s.total() == 0);
    CHECK(s.query(key_of("anything")) == 0);

    CHECK_THROWS_AS(Sketch(0.0, 0.1, 1), UsageError);
    CHECK_THROWS_AS(Sketch(1.0, 0.1, 1), UsageError);
    CHECK_THROWS_AS(Sketch(0.1, 0.0, 1), UsageError);
}

TEST_CASE("single-key streams are counted exactly") {
    Sketch s(0.01, 0.01, 42);
    for (int i = 0; i < 3; ++i) s.update(key_of("k"), 1);
    CHECK(s.query(key_of("k")) == 3);
    CHECK(s.total() == 3);
    CHECK_THROWS_AS(s.update(key_of("k"), 0), UsageError);
}

TEST_CASE("total tracks the L1 mass and row sums equal it") {
    Sketch s(0.05, 0.05, 7);
    s.update(key_of("k1"), 2);
    s.update(key_of("k2"), 5);
    CHECK(s.total() == 7);
    for (int row = 0; row < s.depth(); ++row) {
        uint64_t sum = 0;
        for (int col = 0; col < s.width(); ++col)
            sum += s.counters()[static_cast<size_t>(row) * s.width() + col];
        CHECK(sum == s.total());
    }
}

TEST_CASE("queries never underestimate") {
    Rng rng(99);
    Sketch s(0.02, 0.02, 5);
    std::map<int, uint64_t> truth;
    for (int i = 0; i < 20000; ++i) {
        int k = rng.uniform_int(500);
        uint64_t c = 1 + rng.uniform_int(3);
        truth[k] += c;
        s.update(key_of("key" + std::to_string(k)), c);
    }
    for (const auto& [k, v] : truth) CHECK(s.query(key_of("key" + std::to_string(k))) >= v);
}

TEST_CASE("merging adds counters elementwise") {
    Sketch a(0.05, 0.02, 13);
    Sketch b(0.05, 0.02, 13);
    a.update(key_of("x"), 4);
    b.update(key_of("y"), 9);

    SUBCASE("merge with an empty sketch leaves counters unchanged") {
        Sketch empty(0.05, 0.02, 13);
        Sketch copy = a;
        copy.merge(empty);
        CHECK(copy.counters() == a.counters());
    }

    SUBCASE("disjoint single keys keep their own counts") {
        Sketch merged = a;
        merged.merge(b);
        CHECK(merged.query(key_of("x")) >= 4);
        CHECK(merged.query(key_of("y")) >= 9);
        CHECK(merged.total() == 13);
    }

    SUBCASE("merge is commutative counterwise") {
        Sketch ab = a;
        ab.merge(b);
        Sketch ba = b;
        ba.merge(a);
        CHECK(ab.counters() == ba.counters());
        CHECK(ab.total() == ba.total());
    }

    SUBCASE("mismatched seeds or dimensions are rejected") {
        Sketch other_seed(0.05, 0.02, 14);
        CHECK_THROWS_AS(a.merge(other_seed), IncompatibleError);
        Sketch other_width(0.05, 0.01, 13);
        CHECK_THROWS_AS(a.merge(other_width), IncompatibleError);
    }
}

TEST_CASE("same seed means identical hash functions") {
    Sketch a(0.05, 0.02, 21);
    Sketch b(0.05, 0.02, 21);
    a.update(key_of("shared"), 3);
    b.update(key_of("shared"), 2);
    a.merge(b);
    CHECK(a.query(key_of("shared")) == 5);
}
