#include <doctest.h>

#include <cmath>

#include "rdpforge/metrics.hpp"
#include "rdpforge/rng.hpp"

using namespace rdpforge;

namespace {

// A=2, one binary feature, one reward: 4 step symbols.
AlphabetSpec tiny() { return AlphabetSpec({"a", "b"}, {{"x", "_"}}, {0.0}, 2, {"_"}); }

std::vector<int32_t> all_step_syms(const AlphabetSpec& al) {
    std::vector<int32_t> out;
    for (SymbolId a = 0; a < al.num_actions(); ++a)
        for (SymbolId o = 0; o < al.num_obs(); ++o)
            for (SymbolId r = 0; r < al.num_rewards(); ++r) out.push_back(al.step_sym(a, o, r));
    return out;
}

std::vector<std::vector<int32_t>> all_traces(const AlphabetSpec& al, int steps) {
    std::vector<std::vector<int32_t>> out{{}};
    auto syms = all_step_syms(al);
    for (int s = 0; s < steps; ++s) {
        std::vector<std::vector<int32_t>> next;
        for (const auto& t : out)
            for (int32_t sym : syms) {
                auto u = t;
                u.push_back(sym);
                next.push_back(std::move(u));
            }
        out = std::move(next);
    }
    return out;
}

ExactStore store_of(int steps, const std::vector<std::pair<std::vector<int32_t>, uint64_t>>& items) {
    ExactStore z;
    z.suffix_steps = steps;
    for (const auto& [t, c] : items) z.add(t, c);
    return z;
}

ExactStore random_store(const AlphabetSpec& al, int steps, Rng& rng, uint64_t n) {
    auto traces = all_traces(al, steps);
    ExactStore z;
    z.suffix_steps = steps;
    for (uint64_t i = 0; i < n; ++i)
        z.add(traces[rng.uniform_int(static_cast<int>(traces.size()))]);
    return z;
}

// Fully constrained atom for one step symbol.
LangPtr exact_atom(const AlphabetSpec& al, int32_t step_sym) {
    SymbolId a, o, r;
    al.step_unpack(step_sym, a, o, r);
    StepAtom atom;
    atom.slots.push_back(al.action_token(a));
    for (int i = 0; i < al.num_features(); ++i)
        atom.slots.push_back(al.feature_token(i, al.obs_feature_of(o, i)));
    atom.slots.push_back(al.reward_token(r));
    return make_atom(std::move(atom), al.tokens_per_step());
}

LanguageFamily singleton_family(const AlphabetSpec& al, int steps) {
    LanguageFamily fam;
    fam.ell_tokens = steps * al.tokens_per_step();
    for (const auto& trace : all_traces(al, steps)) {
        std::vector<LangPtr> elems;
        for (int32_t sym : trace) elems.push_back(exact_atom(al, sym));
        fam.langs.push_back(make_concat(elems, std::vector<bool>(steps + 1, false), fam.ell_tokens));
    }
    return fam;
}

LanguageFamily prefix_family(const AlphabetSpec& al, int steps) {
    LanguageFamily fam;
    fam.ell_tokens = steps * al.tokens_per_step();
    for (int u = 1; u <= steps; ++u) {
        for (const auto& prefix : all_traces(al, u)) {
            std::vector<LangPtr> elems;
            for (int32_t sym : prefix) elems.push_back(exact_atom(al, sym));
            std::vector<bool> gaps(u + 1, false);
            gaps[u] = true;  // x followed by anything up to length ell
            fam.langs.push_back(make_concat(elems, gaps, fam.ell_tokens));
        }
    }
    return fam;
}

LanguageFamily powerset_family(const AlphabetSpec& al, int steps) {
    LanguageFamily fam;
    fam.ell_tokens = steps * al.tokens_per_step();
    auto traces = all_traces(al, steps);
    std::vector<LangPtr> singles;
    for (const auto& trace : traces) {
        std::vector<LangPtr> elems;
        for (int32_t sym : trace) elems.push_back(exact_atom(al, sym));
        singles.push_back(make_concat(elems, std::vector<bool>(steps + 1, false), fam.ell_tokens));
    }
    const size_t n = traces.size();
    for (uint32_t mask = 1; mask < (1u << n); ++mask) {
        LangPtr cur;
        for (size_t i = 0; i < n; ++i)
            if ((mask >> i) & 1) cur = cur ? make_union(cur, singles[i]) : singles[i];
        fam.langs.push_back(cur);
    }
    return fam;
}

double direct_linf(const ExactStore& a, const ExactStore& b,
                   const std::vector<std::vector<int32_t>>& support) {
    double best = 0.0;
    for (const auto& t : support) {
        auto ia = a.counts.find(t);
        auto ib = b.counts.find(t);
        double pa = ia == a.counts.end() ? 0.0 : double(ia->second) / double(a.size_n);
        double pb = ib == b.counts.end() ? 0.0 : double(ib->second) / double(b.size_n);
        best = std::max(best, std::abs(pa - pb));
    }
    return best;
}

double direct_tv(const ExactStore& a, const ExactStore& b,
                 const std::vector<std::vector<int32_t>>& support) {
    double l1 = 0.0;
    for (const auto& t : support) {
        auto ia = a.counts.find(t);
        auto ib = b.counts.find(t);
        double pa = ia == a.counts.end() ? 0.0 : double(ia->second) / double(a.size_n);
        double pb = ib == b.counts.end() ? 0.0 : double(ib->second) / double(b.size_n);
        l1 += std::abs(pa - pb);
    }
    return l1 / 2.0;
}

}  // namespace

TEST_CASE("prefix distance on hand-computed multisets") {
    AlphabetSpec al = tiny();
    auto syms = all_step_syms(al);
    std::vector<int32_t> x{syms[0], syms[1]};
    std::vector<int32_t> y{syms[2], syms[1]};  // differs at the first step

    auto z_same = store_of(2, {{x, 2}});
    CHECK(prefix_linf(z_same, z_same) == doctest::Approx(0.0));

    auto z1 = store_of(2, {{x, 2}});
    auto z2 = store_of(2, {{x, 1}, {y, 1}});
    CHECK(prefix_linf(z1, z2) == doctest::Approx(0.5));

    auto p1 = store_of(2, {{x, 1}});
    auto p2 = store_of(2, {{y, 1}});
    CHECK(prefix_linf(p1, p2) == doctest::Approx(1.0));

    ExactStore empty;
    empty.suffix_steps = 2;
    CHECK_THROWS_AS(prefix_linf(z1, empty), UndefinedError);
}

TEST_CASE("test thresholds match their closed forms") {
    AlphabetSpec al = tiny();  // A=2, R=1, O=2 -> ARO = 4... use explicit values below
    AlphabetSpec al8({"a", "b"}, {{"x", "_"}}, {0.0, 1.0}, 2, {"_"});  // ARO = 2*2*2 = 8
    CHECK(al8.num_actions() * al8.num_rewards() * al8.num_obs() == 8);

    double thr = prefix_test_threshold(al8, 1, 0.05, 1000);
    CHECK(thr == doctest::Approx(std::sqrt(2.0 * std::log(1280.0) / 1000.0)).epsilon(1e-12));
    CHECK(thr == doctest::Approx(0.1196).epsilon(1e-3));

    double thr_cms = cms_test_threshold(al8, 1, 0.05, 1000);
    CHECK(thr_cms == doctest::Approx(std::sqrt(8.0 * std::log(16.0 * 8.0 / 0.05) / 1000.0))
                         .epsilon(1e-12));
    CHECK(thr_cms == doctest::Approx(0.2506).epsilon(1e-3));

    double thr_lang = lang_test_threshold(24, 0.05, 1000);
    CHECK(thr_lang == doctest::Approx(std::sqrt(2.0 * std::log(1920.0) / 1000.0)).epsilon(1e-12));
    CHECK(thr_lang == doctest::Approx(0.1230).epsilon(1e-3));

    // the cms test is strictly more conservative than the exact prefix test
    for (int L = 1; L <= 6; ++L)
        CHECK(cms_test_threshold(al8, L, 0.05, 1000) >
              2.0 * prefix_test_threshold(al8, L, 0.05, 1000));

    CHECK_THROWS_AS(prefix_test_threshold(al8, 1, 0.05, 0), UndefinedError);

    // identical multisets are never distinct; thresholds above 1 never fire
    auto syms = all_step_syms(al);
    auto z = store_of(1, {{{syms[0]}, 3}, {{syms[1]}, 2}});
    CHECK_FALSE(test_distinct_prefix(al, 1, z, z, 0.3).distinct);
    auto one1 = store_of(1, {{{syms[0]}, 1}});
    auto one2 = store_of(1, {{{syms[1]}, 1}});
    auto r = test_distinct_prefix(al, 1, one1, one2, 0.05);
    CHECK(r.distance == doctest::Approx(1.0));
    CHECK(r.threshold > 1.0);
    CHECK_FALSE(r.distinct);
}

TEST_CASE("language metric reduces to known metrics under the right family") {
    AlphabetSpec al = tiny();
    Rng rng(2024);
    auto support2 = all_traces(al, 2);
    auto support1 = all_traces(al, 1);

    LanguageFamily singles = singleton_family(al, 2);
    LanguageFamily prefixes = prefix_family(al, 2);
    LanguageFamily powerset = powerset_family(al, 1);

    for (int trial = 0; trial < 20; ++trial) {
        ExactStore z1 = random_store(al, 2, rng, 60);
        ExactStore z2 = random_store(al, 2, rng, 45);
        CHECK(lang_metric(al, singles, z1, z2) ==
              doctest::Approx(direct_linf(z1, z2, support2)).epsilon(1e-12));
        CHECK(lang_metric(al, prefixes, z1, z2) ==
              doctest::Approx(prefix_linf(z1, z2)).epsilon(1e-12));

        ExactStore w1 = random_store(al, 1, rng, 60);
        ExactStore w2 = random_store(al, 1, rng, 45);
        CHECK(lang_metric(al, powerset, w1, w2) ==
              doctest::Approx(direct_tv(w1, w2, support1)).epsilon(1e-12));
    }

    // identical multisets give zero under every family
    ExactStore z = random_store(al, 2, rng, 30);
    CHECK(lang_metric(al, singles, z, z) == doctest::Approx(0.0));
    CHECK(lang_metric(al, prefixes, z, z) == doctest::Approx(0.0));
}

TEST_CASE("prefix and language metrics satisfy the pseudometric axioms") {
    AlphabetSpec al = tiny();
    Rng rng(77);
    LanguageFamily fam = build_family(al, 1, 1, 1, 2 * al.tokens_per_step());
    for (int trial = 0; trial < 1000; ++trial) {
        ExactStore x = random_store(al, 2, rng, 20);
        ExactStore y = random_store(al, 2, rng, 25);
        ExactStore z = random_store(al, 2, rng, 15);
        CHECK(prefix_linf(x, x) == doctest::Approx(0.0));
        double dxy = prefix_linf(x, y), dyx = prefix_linf(y, x);
        double dyz = prefix_linf(y, z), dxz = prefix_linf(x, z);
        CHECK(dxy == doctest::Approx(dyx).epsilon(1e-12));
        CHECK(dxy + dyz >= dxz - 1e-12);

        double lxy = lang_metric(al, fam, x, y), lyx = lang_metric(al, fam, y, x);
        double lyz = lang_metric(al, fam, y, z), lxz = lang_metric(al, fam, x, z);
        CHECK(lang_metric(al, fam, x, x) == doctest::Approx(0.0));
        CHECK(lxy == doctest::Approx(lyx).epsilon(1e-12));
        CHECK(lxy + lyz >= lxz - 1e-12);
    }
}

TEST_CASE("larger families never decrease the language metric") {
    AlphabetSpec al = tiny();
    Rng rng(31);
    auto f111 = build_family(al, 1, 1, 1, 2 * al.tokens_per_step());
    auto f121 = build_family(al, 1, 2, 1, 2 * al.tokens_per_step(), 200000);
    auto f112 = build_family(al, 1, 1, 2, 2 * al.tokens_per_step(), 200000);
    for (int trial = 0; trial < 50; ++trial) {
        ExactStore x = random_store(al, 2, rng, 30);
        ExactStore y = random_store(al, 2, rng, 30);
        double base = lang_metric(al, f111, x, y);
        CHECK(lang_metric(al, f121, x, y) >= base - 1e-12);
        CHECK(lang_metric(al, f112, x, y) >= base - 1e-12);
    }
}

TEST_CASE("sketched prefix distance brackets the exact one") {
    AlphabetSpec al = tiny();
    Rng rng(5);
    const double delta_c = 0.01;
    const double epsilon = 0.01;  // wide sketch: 2*eps slack is tight
    for (int trial = 0; trial < 10; ++trial) {
        ExactStore z1 = random_store(al, 2, rng, 400);
        ExactStore z2 = random_store(al, 2, rng, 300);
        uint64_t seed = derive_seed(888, trial);
        SketchedStore s1 = SketchedStore::make(2, delta_c, epsilon, seed);
        SketchedStore s2 = SketchedStore::make(2, delta_c, epsilon, seed);
        for (const auto& [t, c] : z1.counts) s1.add(t, c);
        for (const auto& [t, c] : z2.counts) s2.add(t, c);
        double exact = prefix_linf(z1, z2);
        double sketched = prefix_linf_cms(al, s1, s2);  // full enumeration
        CHECK(sketched >= exact - 2.0 * epsilon);
        CHECK(sketched <= exact + 2.0 * epsilon);
    }
}

TEST_CASE("sketched stores with identical data and seeds have zero distance") {
    AlphabetSpec al = tiny();
    Rng rng(6);
    ExactStore z = random_store(al, 2, rng, 100);
    SketchedStore s1 = SketchedStore::make(2, 0.05, 0.05, 4242);
    SketchedStore s2 = SketchedStore::make(2, 0.05, 0.05, 4242);
    for (const auto& [t, c] : z.counts) {
        s1.add(t, c);
        s2.add(t, c);
    }
    CHECK(prefix_linf_cms(al, s1, s2) == doctest::Approx(0.0));
    CHECK_FALSE(test_distinct_cms(al, 2, s1, s2, 0.05).distinct);

    SketchedStore other = SketchedStore::make(2, 0.05, 0.05, 4243);
    other.add(std::vector<int32_t>{all_step_syms(al)[0], all_step_syms(al)[1]});
    CHECK_THROWS_AS(prefix_linf_cms(al, s1, other), IncompatibleError);

    SketchedStore empty = SketchedStore::make(2, 0.05, 0.05, 4242);
    CHECK_THROWS_AS(prefix_linf_cms(al, s1, empty), UndefinedError);
}

TEST_CASE("the cms test fires on well-separated multisets") {
    AlphabetSpec al8({"a", "b"}, {{"x", "_"}}, {0.0, 1.0}, 2, {"_"});
    auto syms = all_step_syms(al8);
    std::vector<int32_t> x{syms[0]};
    std::vector<int32_t> y{syms[3]};
    double delta = 0.05;
    double delta_c = cms_delta_c_for(al8, 1, delta);
    double epsilon = std::sqrt(std::log(2.0 / delta_c) / (2.0 * 1000.0));
    SketchedStore s1 = SketchedStore::make(1, delta_c, epsilon, 99);
    SketchedStore s2 = SketchedStore::make(1, delta_c, epsilon, 99);
    s1.add(x, 1000);
    s2.add(x, 500);
    s2.add(y, 500);
    auto r = test_distinct_cms(al8, 1, s1, s2, delta);
    CHECK(r.distance == doctest::Approx(0.5).epsilon(0.1));
    CHECK(r.threshold == doctest::Approx(0.2506).epsilon(1e-3));
    CHECK(r.distinct);
}

TEST_CASE("language tester rejects sketched stores") {
    TesterConfig t;
    t.kind = TesterKind::Language;
    t.sketched_stores = true;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    t.sketched_stores = false;
    CHECK_NOTHROW(t.validate());
}
