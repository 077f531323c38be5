#include <doctest.h>

#include <set>
#include <sstream>

#include "rdpforge/dataset_io.hpp"
#include "rdpforge/env.hpp"

using namespace rdpforge;

namespace {

AlphabetSpec tmaze_alphabet(int horizon = 5) {
    return AlphabetSpec({"North", "South", "East", "West"}, {{"011", "110", "101", "010"}},
                        {0.0, 4.0, -1.0}, horizon, {"_"});
}

Episode tmaze_episode(const AlphabetSpec& a) {
    // start, then wander, ending on the terminal observation
    Episode e;
    auto obs = [&](const char* s) { return *a.feature_id(0, s); };
    e.steps = {
        {a.start_action(), obs("110"), *a.reward_id(0.0)},
        {*a.action_id("East"), obs("101"), *a.reward_id(0.0)},
        {*a.action_id("East"), obs("010"), *a.reward_id(0.0)},
        {*a.action_id("North"), obs("010"), *a.reward_id(4.0)},
        {*a.action_id("West"), obs("010"), *a.reward_id(0.0)},
        {*a.action_id("East"), obs("_"), *a.reward_id(0.0)},
    };
    return e;
}

}  // namespace

TEST_CASE("tokenize flattens steps as action, features, reward") {
    AlphabetSpec a = tmaze_alphabet();
    Episode e = tmaze_episode(a);

    auto one = tokenize(a, e, 1, 1);
    REQUIRE(one.size() == 3);
    CHECK(one[0].category == Token::Category::Action);
    CHECK(one[0].symbol == *a.action_id("East"));
    CHECK(one[1].category == Token::Category::Feature);
    CHECK(one[1].symbol == *a.feature_id(0, "101"));
    CHECK(one[2].category == Token::Category::Reward);
    CHECK(a.reward_value(one[2].symbol) == 0.0);

    // full T-maze episode: 6 steps x 3 tokens
    auto all = tokenize(a, e, 0, 5);
    CHECK(all.size() == 18);
    CHECK(all.size() == static_cast<size_t>((a.horizon() + 1) * a.tokens_per_step()));

    CHECK_THROWS_AS(tokenize(a, e, 3, 2), UsageError);
    CHECK_THROWS_AS(tokenize(a, e, 0, 6), UsageError);
}

TEST_CASE("token categories are disjoint, so steps tokenize injectively") {
    AlphabetSpec a = tmaze_alphabet();
    std::set<int32_t> ids;
    for (SymbolId s = 0; s <= a.start_action(); ++s) ids.insert(a.action_token(s));
    for (SymbolId s = 0; s < a.feature_size(0); ++s) ids.insert(a.feature_token(0, s));
    for (SymbolId s = 0; s < a.num_rewards(); ++s) ids.insert(a.reward_token(s));
    CHECK(static_cast<int>(ids.size()) == a.num_token_ids());

    // distinct steps yield distinct token triples
    std::set<std::vector<int32_t>> seen;
    Episode probe;
    probe.steps.resize(1);
    int count = 0;
    for (SymbolId act = 0; act < a.num_actions(); ++act)
        for (SymbolId o = 0; o < a.num_obs(); ++o)
            for (SymbolId r = 0; r < a.num_rewards(); ++r) {
                probe.steps[0] = {act, o, r};
                std::vector<int32_t> ids2;
                tokenize_ids(a, probe, 0, 0, ids2);
                seen.insert(ids2);
                ++count;
            }
    CHECK(static_cast<int>(seen.size()) == count);
}

TEST_CASE("token_of inverts the global token ids") {
    AlphabetSpec a = tmaze_alphabet();
    for (int32_t id = 0; id < a.num_token_ids(); ++id) {
        Token t = a.token_of(id);
        CHECK(t.global_id == id);
        switch (t.category) {
            case Token::Category::Action: CHECK(a.action_token(t.symbol) == id); break;
            case Token::Category::Feature: CHECK(a.feature_token(t.feature_index, t.symbol) == id); break;
            case Token::Category::Reward: CHECK(a.reward_token(t.symbol) == id); break;
        }
    }
}

TEST_CASE("suffix_of returns the trailing steps") {
    AlphabetSpec a = tmaze_alphabet();
    Episode e = tmaze_episode(a);
    CHECK(suffix_of(a, e, 0) == e.steps);
    CHECK(suffix_of(a, e, 5).size() == 1);
    CHECK(suffix_of(a, e, 2).size() == 4);
    CHECK_THROWS_AS(suffix_of(a, e, 6), UsageError);
}

TEST_CASE("alphabet validation") {
    CHECK_THROWS_AS(AlphabetSpec({"a"}, {{"x", "y"}}, {0.0}, 3, {"_"}), UsageError);
    CHECK_THROWS_AS(AlphabetSpec({"a", "a"}, {{"x", "y"}}, {0.0}, 3, {"_"}), UsageError);
    CHECK_THROWS_AS(AlphabetSpec({"a", "b"}, {{"x", "y"}}, {0.0, 0.0}, 3, {"_"}), UsageError);
    CHECK_THROWS_AS(AlphabetSpec({"a", "b"}, {{"x", "y"}}, {0.0}, 0, {"_"}), UsageError);

    // terminal symbol is appended to the domain when missing
    AlphabetSpec a({"a", "b"}, {{"x", "y"}}, {0.0}, 3, {"_"});
    CHECK(a.feature_size(0) == 3);
    CHECK(a.obs_feature_of(a.terminal_obs(), 0) == *a.feature_id(0, "_"));
}

TEST_CASE("obs packing round-trips") {
    AlphabetSpec a({"a", "b"}, {{"0", "1"}, {"p", "q", "r"}}, {0.0}, 3, {"_", "_"});
    for (SymbolId flat = 0; flat < a.num_obs(); ++flat) {
        auto parts = a.obs_unpack(flat);
        CHECK(a.obs_flat(parts) == flat);
    }
}

TEST_CASE("dataset file round-trip is the identity") {
    auto env = make_env("corridor", {5, {{"length", 4}}});
    Dataset ds = generate_dataset(*env, uniform_policy(*env), 3, 11);
    std::stringstream buf;
    save_dataset(ds, buf);
    Dataset back = load_dataset(buf);
    CHECK(back.alphabet == ds.alphabet);
    CHECK(back.episodes == ds.episodes);
    CHECK(back.metadata == ds.metadata);
    CHECK(back.fingerprint() == ds.fingerprint());
}

TEST_CASE("dataset parse errors name the offending line") {
    auto env = make_env("corridor", {5, {{"length", 4}}});
    Dataset ds = generate_dataset(*env, uniform_policy(*env), 2, 11);
    std::stringstream buf;
    save_dataset(ds, buf);
    std::string text = buf.str();

    SUBCASE("episode with a truncated step count") {
        // drop the last step of episode 1 (line 3)
        std::istringstream in(text);
        std::string header, e0, e1;
        std::getline(in, header);
        std::getline(in, e0);
        std::getline(in, e1);
        std::string trimmed = e1.substr(0, e1.rfind(",{"));
        trimmed += "]";
        std::istringstream bad(header + "\n" + e0 + "\n" + trimmed + "\n");
        try {
            load_dataset(bad);
            FAIL("expected a parse error");
        } catch (const ParseError& ex) {
            CHECK(ex.line_number == 3);
            CHECK(std::string(ex.what()).find("episode 1") != std::string::npos);
        }
    }

    SUBCASE("unknown action symbol") {
        auto pos = text.find("\"a\":\"a0\"", text.find('\n'));
        REQUIRE(pos != std::string::npos);
        std::string bad = text;
        bad.replace(pos, 8, "\"a\":\"zz\"");
        std::istringstream in(bad);
        CHECK_THROWS_AS(load_dataset(in), ParseError);
    }

    SUBCASE("missing header") {
        std::istringstream in("");
        CHECK_THROWS_AS(load_dataset(in), ParseError);
    }
}
