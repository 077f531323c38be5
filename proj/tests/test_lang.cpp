#include <doctest.h>

#include <set>

#include "rdpforge/env.hpp"
#include "rdpforge/lang.hpp"

using namespace rdpforge;

namespace {

// Reference denotation over step-aligned traces, built by definitional set
// operations (independent of the matcher's position DP).
struct RefDenotation {
    const AlphabetSpec& a;
    std::vector<std::vector<int32_t>> steps;  // every possible step block

    explicit RefDenotation(const AlphabetSpec& alphabet) : a(alphabet) {
        for (SymbolId act = 0; act < a.num_actions(); ++act)
            for (SymbolId o = 0; o < a.num_obs(); ++o)
                for (SymbolId r = 0; r < a.num_rewards(); ++r) {
                    std::vector<int32_t> block;
                    block.push_back(a.action_token(act));
                    for (int i = 0; i < a.num_features(); ++i)
                        block.push_back(a.feature_token(i, a.obs_feature_of(o, i)));
                    block.push_back(a.reward_token(r));
                    steps.push_back(std::move(block));
                }
    }

    std::vector<std::vector<int32_t>> all_traces(int n_steps) const {
        std::vector<std::vector<int32_t>> out{{}};
        for (int s = 0; s < n_steps; ++s) {
            std::vector<std::vector<int32_t>> next;
            for (const auto& prefix : out)
                for (const auto& block : steps) {
                    auto t = prefix;
                    t.insert(t.end(), block.begin(), block.end());
                    next.push_back(std::move(t));
                }
            out = std::move(next);
        }
        return out;
    }

    std::set<std::vector<int32_t>> denot(const LangNode& n) const {
        switch (n.kind) {
            case LangNode::Kind::Atom: {
                std::set<std::vector<int32_t>> out;
                for (const auto& block : steps) {
                    bool ok = true;
                    for (size_t i = 0; i < block.size(); ++i)
                        if (n.atom.slots[i] >= 0 && n.atom.slots[i] != block[i]) ok = false;
                    if (ok) out.insert(block);
                }
                return out;
            }
            case LangNode::Kind::Union: {
                auto l = denot(*n.left);
                auto r = denot(*n.right);
                l.insert(r.begin(), r.end());
                return l;
            }
            case LangNode::Kind::Inter: {
                auto l = denot(*n.left);
                auto r = denot(*n.right);
                std::set<std::vector<int32_t>> out;
                for (const auto& s : l)
                    if (r.count(s)) out.insert(s);
                return out;
            }
            case LangNode::Kind::Concat: {
                const int ell = n.pattern.ell_tokens;
                std::set<std::vector<int32_t>> cur{{}};
                auto gap = [&](std::set<std::vector<int32_t>> in) {
                    std::set<std::vector<int32_t>> out;
                    while (!in.empty()) {
                        std::set<std::vector<int32_t>> grown;
                        for (const auto& s : in) {
                            if (out.insert(s).second && static_cast<int>(s.size()) < ell)
                                for (const auto& block : steps) {
                                    auto t = s;
                                    t.insert(t.end(), block.begin(), block.end());
                                    if (static_cast<int>(t.size()) <= ell) grown.insert(std::move(t));
                                }
                        }
                        in = std::move(grown);
                    }
                    return out;
                };
                if (n.pattern.gaps[0]) cur = gap(std::move(cur));
                for (size_t e = 0; e < n.pattern.elems.size(); ++e) {
                    auto elem_set = denot(*n.pattern.elems[e]);
                    std::set<std::vector<int32_t>> next;
                    for (const auto& prefix : cur)
                        for (const auto& w : elem_set) {
                            auto t = prefix;
                            t.insert(t.end(), w.begin(), w.end());
                            if (static_cast<int>(t.size()) <= ell) next.insert(std::move(t));
                        }
                    cur = std::move(next);
                    if (n.pattern.gaps[e + 1]) cur = gap(std::move(cur));
                }
                std::set<std::vector<int32_t>> out;
                for (const auto& s : cur)
                    if (static_cast<int>(s.size()) == ell) out.insert(s);
                return out;
            }
        }
        return {};
    }
};

AlphabetSpec small_alphabet() {
    // A=2, one feature with two symbols (terminal included), one reward
    return AlphabetSpec({"a", "b"}, {{"x", "_"}}, {0.0}, 3, {"_"});
}

bool family_subset(const std::vector<LangPtr>& small, const std::vector<LangPtr>& big) {
    for (const auto& l : small) {
        bool found = false;
        for (const auto& r : big)
            if (lang_equal(*l, *r)) {
                found = true;
                break;
            }
        if (!found) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("base pattern counts match A + R + sum of feature sizes") {
    AlphabetSpec two({"a", "b"}, {{"x", "_"}}, {0.0, 1.0}, 3, {"_"});
    CHECK(base_patterns(two).size() == 6);  // 2 + 2 + 2

    GroundTruthRdp tm = tmaze_machine(5, 3);
    CHECK(base_patterns(tm.alphabet).size() == 12);  // 4 actions + 3 rewards + 5 obs

    // every atom constrains exactly one slot
    for (const auto& l : base_patterns(two)) {
        int constrained = 0;
        for (int32_t s : l->atom.slots)
            if (s >= 0) ++constrained;
        CHECK(constrained == 1);
    }
}

TEST_CASE("boolean closure adds pairwise unions and intersections") {
    // Languages {ac, ad} and {ac, bc} over actions {a,b} and feature {c,d}.
    AlphabetSpec al({"a", "b"}, {{"c", "d"}}, {0.0}, 2, {"d"});
    RefDenotation ref(al);
    auto g = base_patterns(al);
    LangPtr action_a = g[0];                       // {ac, ad}
    LangPtr feat_c;
    for (const auto& l : g)
        if (l->atom.slots[1] == al.feature_token(0, *al.feature_id(0, "c"))) feat_c = l;
    REQUIRE(action_a->atom.slots[0] == al.action_token(*al.action_id("a")));
    REQUIRE(feat_c);

    auto closed = boolean_close({action_a, feat_c}, 1000);
    CHECK(closed.size() == 4);  // originals + one union + one intersection

    std::set<size_t> sizes;
    for (const auto& l : closed) sizes.insert(ref.denot(*l).size());
    CHECK(sizes == std::set<size_t>{1, 2, 3});  // {ac}, the originals, {ac, ad, bc}

    // singleton input: L ∪ L = L ∩ L = L
    auto single = boolean_close({action_a}, 1000);
    CHECK(single.size() == 1);
    CHECK(lang_equal(*single[0], *action_a));
}

TEST_CASE("concat family enumerates anchor choices") {
    AlphabetSpec two({"a", "b"}, {{"x", "_"}}, {0.0, 1.0}, 3, {"_"});
    auto g = base_patterns(two);
    REQUIRE(g.size() == 6);
    auto c1 = concat_family(g, 1, 9, 100000);
    CHECK(c1.size() == 24);  // 6 atoms x 4 separator choices

    // all-empty separators need k(m+2) == ell for a nonempty denotation
    RefDenotation ref(two);
    auto tight = make_concat({g[0]}, {false, false}, 9);
    CHECK(ref.denot(*tight).empty());
    for (const auto& trace : ref.all_traces(3)) CHECK_FALSE(contains(*tight, trace));
    auto exact_len = make_concat({g[0]}, {false, false}, 3);
    CHECK_FALSE(ref.denot(*exact_len).empty());
}

TEST_CASE("matcher agrees with brute-force denotations on a small alphabet") {
    AlphabetSpec al = small_alphabet();
    RefDenotation ref(al);
    auto traces = ref.all_traces(3);
    REQUIRE(traces.size() == 64);

    LanguageFamily fam = build_family(al, 1, 1, 1, 9);
    LanguageFamily deeper = build_family(al, 1, 2, 2, 9, 200000);
    std::vector<LangPtr> all = fam.langs;
    all.insert(all.end(), deeper.langs.begin(), deeper.langs.end());

    size_t checked = 0;
    for (const auto& l : all) {
        auto expected = ref.denot(*l);
        for (const auto& trace : traces) {
            bool want = expected.count(trace) > 0;
            CHECK(contains(*l, trace) == want);
            ++checked;
        }
    }
    CHECK(checked >= 64 * fam.size());
}

TEST_CASE("family hierarchy grows monotonically") {
    AlphabetSpec al = small_alphabet();
    auto f111 = build_family(al, 1, 1, 1, 9);
    auto f121 = build_family(al, 1, 2, 1, 9, 200000);
    auto f112 = build_family(al, 1, 1, 2, 9, 200000);
    auto f211 = build_family(al, 2, 1, 1, 9, 200000);
    CHECK(family_subset(f111.langs, f121.langs));
    CHECK(family_subset(f111.langs, f112.langs));
    CHECK(family_subset(f111.langs, f211.langs));
    CHECK(f121.size() > f111.size());
    CHECK(f112.size() > f111.size());

    CHECK_THROWS_AS(build_family(al, 1, 2, 3, 9, 100), LimitError);
    CHECK_THROWS_AS(build_family(al, 9, 1, 1, 9), UsageError);
}

TEST_CASE("the tmaze family contains the anywhere-110 pattern") {
    GroundTruthRdp tm = tmaze_machine(5, 3);
    const AlphabetSpec& al = tm.alphabet;
    LanguageFamily fam = build_family(al, 1, 1, 1, 9);  // three-step suffixes

    int32_t tok110 = al.feature_token(0, *al.feature_id(0, "110"));
    const LangNode* anywhere = nullptr;
    for (const auto& l : fam.langs) {
        if (l->kind != LangNode::Kind::Concat) continue;
        const Pattern& p = l->pattern;
        if (p.elems.size() == 1 && p.gaps[0] && p.gaps[1] &&
            p.elems[0]->kind == LangNode::Kind::Atom && p.elems[0]->atom.slots[1] == tok110)
            anywhere = l.get();
    }
    REQUIRE(anywhere);

    auto step = [&](const char* a, const char* o, double r) {
        std::vector<int32_t> t{al.action_token(*al.action_id(a)),
                               al.feature_token(0, *al.feature_id(0, o)),
                               al.reward_token(*al.reward_id(r))};
        return t;
    };
    auto concat3 = [&](std::vector<int32_t> x, std::vector<int32_t> y, std::vector<int32_t> z) {
        x.insert(x.end(), y.begin(), y.end());
        x.insert(x.end(), z.begin(), z.end());
        return x;
    };
    CHECK(contains(*anywhere, concat3(step("East", "101", 0), step("West", "110", 0),
                                      step("East", "101", 0))));
    CHECK_FALSE(contains(*anywhere, concat3(step("East", "101", 0), step("East", "101", 0),
                                            step("East", "101", 0))));
    CHECK_THROWS_AS(contains(*anywhere, step("East", "101", 0)), UsageError);
}

TEST_CASE("membership is decidable for every generated tmaze suffix") {
    EnvParams params;
    params.horizon = 5;
    params.extra["corridor"] = 3;
    auto env = make_env("tmaze", params);
    Dataset ds = generate_dataset(*env, uniform_policy(*env), 1000, 3);
    const AlphabetSpec& al = ds.alphabet;
    LanguageFamily fam = build_family(al, 1, 1, 1, 4 * al.tokens_per_step());
    std::vector<int32_t> tokens;
    size_t hits = 0;
    for (const Episode& e : ds.episodes) {
        tokenize_ids(al, e, 2, 5, tokens);
        for (const auto& l : fam.langs)
            if (contains(*l, tokens)) ++hits;
    }
    CHECK(hits > 0);
}

TEST_CASE("estimate_prob is the member fraction") {
    AlphabetSpec al = small_alphabet();
    RefDenotation ref(al);
    auto traces = ref.all_traces(1);
    REQUIRE(traces.size() == 4);
    auto g = base_patterns(al);
    LangPtr action_a = g[0];  // matches the two traces taking action a

    std::vector<std::vector<int32_t>> empty_ms;
    CHECK_THROWS_AS(estimate_prob(*action_a, empty_ms), UndefinedError);

    std::vector<std::vector<int32_t>> quad{traces[0], traces[1], traces[2], traces[3]};
    CHECK(estimate_prob(*action_a, quad) == doctest::Approx(0.5));
    std::vector<std::vector<int32_t>> same{traces[0], traces[0]};
    CHECK(estimate_prob(*action_a, same) == doctest::Approx(1.0));
    std::vector<std::vector<int32_t>> none{traces[2], traces[3]};
    CHECK(estimate_prob(*action_a, none) == doctest::Approx(0.0));
}

TEST_CASE("structural dedup identifies equal nodes and keeps distinct ones") {
    AlphabetSpec al = small_alphabet();
    auto g = base_patterns(al);
    auto p1 = make_concat({g[0], g[1]}, {true, false, true}, 9);
    auto p2 = make_concat({g[0], g[1]}, {true, false, true}, 9);
    auto p3 = make_concat({g[1], g[0]}, {true, false, true}, 9);
    CHECK(lang_equal(*p1, *p2));
    CHECK(p1->hash == p2->hash);
    CHECK_FALSE(lang_equal(*p1, *p3));

    // union is order-insensitive
    CHECK(lang_equal(*make_union(g[0], g[1]), *make_union(g[1], g[0])));
}
