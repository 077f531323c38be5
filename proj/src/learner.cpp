#include "rdpforge/learner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "rdpforge/rng.hpp"

namespace rdpforge {

using nlohmann::json;

std::optional<int> LearnedRdp::next_state(int q, SymbolId a, SymbolId obs) const {
    auto it = transitions.find(key(q, a, obs));
    if (it == transitions.end()) return std::nullopt;
    return it->second;
}

std::optional<int> map_history(const LearnedRdp& rdp, std::span<const Step> history) {
    if (static_cast<int>(history.size()) > rdp.alphabet.horizon() + 1)
        throw UsageError("map_history: history longer than an episode");
    int q = rdp.initial_state;
    for (const Step& s : history) {
        auto next = rdp.next_state(q, s.action, s.obs);
        if (!next) return std::nullopt;
        q = *next;
    }
    return q;
}

namespace {

struct Candidate {
    int parent = 0;
    SymbolId action = 0;
    SymbolId obs = 0;
    std::vector<uint32_t> episodes;

    // Stores, one of which is populated depending on the tester kind.
    std::vector<uint64_t> lang_counts;
    ExactStore exact;
    std::optional<SketchedStore> sketch;
    uint64_t n() const { return episodes.size(); }
};

}  // namespace

LearnResult adact_h(const Dataset& dataset, double delta, const TesterConfig& tester,
                    uint64_t seed, std::optional<std::chrono::steady_clock::time_point> deadline) {
    tester.validate();
    if (!(delta > 0.0 && delta < 1.0)) throw UsageError("adact_h: delta must be in (0,1)");
    if (dataset.episodes.empty()) throw UsageError("adact_h: empty dataset");
    dataset.validate();

    const auto t_start = std::chrono::steady_clock::now();
    auto check_deadline = [&] {
        if (deadline && std::chrono::steady_clock::now() > *deadline)
            throw BudgetError("adact_h: learn budget exceeded");
    };

    const AlphabetSpec& al = dataset.alphabet;
    const int H = al.horizon();
    const size_t N = dataset.episodes.size();

    LearnResult result;
    LearnedRdp& rdp = result.rdp;
    rdp.alphabet = al;
    rdp.layers.resize(H + 2);
    rdp.tester = tester_kind_name(tester.kind);
    rdp.delta = delta;
    if (tester.kind == TesterKind::Language) {
        rdp.fam_i = tester.fam_i;
        rdp.fam_j = tester.fam_j;
        rdp.fam_k = tester.fam_k;
    }
    rdp.dataset_fingerprint = dataset.fingerprint();
    rdp.seed = seed;
    rdp.dataset_episodes = N;

    auto add_state = [&rdp](int layer, uint64_t support) {
        int id = static_cast<int>(rdp.state_layer.size());
        rdp.state_layer.push_back(layer);
        rdp.layers[layer].push_back(id);
        rdp.state_support.push_back(support);
        return id;
    };

    rdp.initial_state = add_state(0, N);
    std::vector<int> cur(N, rdp.initial_state);  // state of each episode at the current layer

    for (int t = 0; t <= H; ++t) {
        check_deadline();
        const int L = H - t;  // steps in the candidate suffixes

        // Group episodes into candidates by (state, a_t, o_t).
        std::map<std::tuple<int, SymbolId, SymbolId>, size_t> index;
        std::vector<Candidate> cands;
        for (size_t e = 0; e < N; ++e) {
            const Step& s = dataset.episodes[e].steps[t];
            auto key = std::make_tuple(cur[e], s.action, s.obs);
            auto [it, inserted] = index.emplace(key, cands.size());
            if (inserted) {
                Candidate c;
                c.parent = cur[e];
                c.action = s.action;
                c.obs = s.obs;
                cands.push_back(std::move(c));
            }
            cands[it->second].episodes.push_back(static_cast<uint32_t>(e));
        }

        // Per-layer language family / sketch parameters.
        LanguageFamily family;
        double delta_c = 0.0, epsilon = 0.0;
        uint64_t layer_seed = derive_seed(seed, 0xadac0000ull + t);
        if (tester.kind == TesterKind::Language) {
            family = build_family(al, tester.fam_i, tester.fam_j, tester.fam_k,
                                  L * al.tokens_per_step(), tester.family_cap);
        } else if (tester.kind == TesterKind::PrefixCms) {
            delta_c = tester.cms_delta_c.value_or(cms_delta_c_for(al, L, delta));
            epsilon = tester.cms_epsilon.value_or(
                std::sqrt(std::log(2.0 / delta_c) / (2.0 * static_cast<double>(N))));
        }

        // Stores are populated lazily, one candidate at a time; only promoted
        // states keep theirs, so memory stays proportional to the layer size.
        std::vector<int32_t> step_trace;
        std::vector<int32_t> tokens;
        auto populate = [&](Candidate& c) {
            if (tester.kind == TesterKind::Language)
                c.lang_counts.assign(family.size(), 0);
            else if (tester.kind == TesterKind::PrefixExact)
                c.exact.suffix_steps = L;
            else
                c.sketch = SketchedStore::make(L, delta_c, epsilon, layer_seed);
            for (uint32_t e : c.episodes) {
                const Episode& ep = dataset.episodes[e];
                step_trace.clear();
                for (int u = t + 1; u <= H; ++u) {
                    const Step& s = ep.steps[u];
                    step_trace.push_back(al.step_sym(s.action, s.obs, s.reward));
                }
                switch (tester.kind) {
                    case TesterKind::Language: {
                        tokens.clear();
                        if (t < H) tokenize_ids(al, ep, t + 1, H, tokens);
                        for (size_t x = 0; x < family.size(); ++x)
                            if (contains(*family.langs[x], tokens)) ++c.lang_counts[x];
                        break;
                    }
                    case TesterKind::PrefixExact:
                        c.exact.add(step_trace);
                        break;
                    case TesterKind::PrefixCms:
                        c.sketch->add(step_trace);
                        break;
                }
            }
        };
        auto release = [&](Candidate& c) {
            c.lang_counts.clear();
            c.lang_counts.shrink_to_fit();
            c.exact.counts.clear();
            c.sketch.reset();
        };

        // Deterministic processing order: most common first, ties lexicographic.
        std::vector<size_t> order(cands.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
            const Candidate& a = cands[x];
            const Candidate& b = cands[y];
            if (a.n() != b.n()) return a.n() > b.n();
            return std::tie(a.parent, a.action, a.obs) < std::tie(b.parent, b.action, b.obs);
        });

        LayerStats ls;
        ls.layer = t + 1;
        ls.min_candidate = cands.empty() ? 0 : cands[order[0]].n();
        std::vector<size_t> promoted;  // candidate indices, in promotion order
        std::vector<int> promoted_state;

        auto run_test = [&](const Candidate& cand, const Candidate& prom) {
            TestResult r;
            switch (tester.kind) {
                case TesterKind::Language:
                    r.distance = lang_metric_counts(cand.lang_counts, cand.n(),
                                                    prom.lang_counts, prom.n());
                    r.threshold =
                        lang_test_threshold(family.size(), delta, std::min(cand.n(), prom.n()));
                    r.distinct = r.distance >= r.threshold;
                    break;
                case TesterKind::PrefixExact:
                    r = test_distinct_prefix(al, L, cand.exact, prom.exact, delta);
                    break;
                case TesterKind::PrefixCms:
                    r = test_distinct_cms(al, L, *cand.sketch, *prom.sketch, delta,
                                          tester.cms_depth_cap);
                    break;
            }
            return r;
        };

        for (size_t oi = 0; oi < order.size(); ++oi) {
            Candidate& cand = cands[order[oi]];
            ls.min_candidate = std::min(ls.min_candidate, cand.n());
            ls.max_candidate = std::max(ls.max_candidate, cand.n());
            populate(cand);
            if (oi == 0) {
                promoted.push_back(order[oi]);
                promoted_state.push_back(add_state(t + 1, cand.n()));
                rdp.transitions[LearnedRdp::key(cand.parent, cand.action, cand.obs)] =
                    promoted_state.back();
                continue;
            }
            check_deadline();
            // Compare against every promoted state; merge into the closest
            // non-distinct one.
            int best = -1;
            double best_distance = 0.0;
            for (size_t p = 0; p < promoted.size(); ++p) {
                TestResult r = run_test(cand, cands[promoted[p]]);
                ++ls.tests;
                result.test_log.push_back({t, L, cand.parent, cand.action, cand.obs,
                                           promoted_state[p], r.distance, r.threshold,
                                           r.distinct});
                if (!r.distinct && (best < 0 || r.distance < best_distance)) {
                    best = static_cast<int>(p);
                    best_distance = r.distance;
                }
            }
            if (best < 0) {
                promoted.push_back(order[oi]);
                promoted_state.push_back(add_state(t + 1, cand.n()));
                rdp.transitions[LearnedRdp::key(cand.parent, cand.action, cand.obs)] =
                    promoted_state.back();
            } else {
                Candidate& target = cands[promoted[best]];
                rdp.transitions[LearnedRdp::key(cand.parent, cand.action, cand.obs)] =
                    promoted_state[best];
                rdp.state_support[promoted_state[best]] += cand.n();
                ++ls.merges;
                // Union the suffix stores.
                switch (tester.kind) {
                    case TesterKind::Language:
                        for (size_t x = 0; x < family.size(); ++x)
                            target.lang_counts[x] += cand.lang_counts[x];
                        break;
                    case TesterKind::PrefixExact:
                        target.exact.merge(cand.exact);
                        break;
                    case TesterKind::PrefixCms:
                        target.sketch->merge(*cand.sketch);
                        break;
                }
                target.episodes.insert(target.episodes.end(), cand.episodes.begin(),
                                       cand.episodes.end());
                release(cand);
            }
        }

        // Route episodes through the new layer.
        for (size_t p = 0; p < promoted.size(); ++p)
            for (uint32_t e : cands[promoted[p]].episodes) cur[e] = promoted_state[p];

        ls.states = static_cast<int>(promoted.size());
        result.stats.layers.push_back(ls);
    }

    result.stats.total_states = rdp.num_states();
    for (const LayerStats& ls : result.stats.layers) {
        result.stats.total_tests += ls.tests;
        result.stats.total_merges += ls.merges;
    }
    result.stats.learn_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

namespace {

json alphabet_json(const AlphabetSpec& a) {
    return json{{"actions", a.actions()},
                {"obs_features", a.obs_features()},
                {"rewards", a.rewards()},
                {"horizon", a.horizon()},
                {"terminal_obs", a.terminal_obs_symbols()}};
}

}  // namespace

std::string LearnedRdp::to_json() const {
    json j;
    j["format"] = "rdpforge-rdp-v1";
    j["alphabet"] = alphabet_json(alphabet);
    j["layers"] = layers;
    j["initial_state"] = initial_state;
    j["state_support"] = state_support;
    json trans = json::array();
    std::vector<std::tuple<int, SymbolId, SymbolId, int>> sorted;
    sorted.reserve(transitions.size());
    for (const auto& [k, to] : transitions)
        sorted.emplace_back(static_cast<int>(k >> 32), static_cast<SymbolId>((k >> 24) & 0xff),
                            static_cast<SymbolId>(k & 0xffffff), to);
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [q, a, obs, to] : sorted) trans.push_back(json::array({q, a, obs, to}));
    j["transitions"] = std::move(trans);
    j["provenance"] = json{{"tester", tester},
                           {"delta", delta},
                           {"family", {fam_i, fam_j, fam_k}},
                           {"dataset_fingerprint", dataset_fingerprint},
                           {"seed", seed},
                           {"dataset_episodes", dataset_episodes}};
    return j.dump(2);
}

LearnedRdp LearnedRdp::from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("format", "") != "rdpforge-rdp-v1") throw ParseError(1, "not a learned-rdp file");
    const json& a = j.at("alphabet");
    LearnedRdp r;
    r.alphabet = AlphabetSpec(a.at("actions").get<std::vector<std::string>>(),
                              a.at("obs_features").get<std::vector<std::vector<std::string>>>(),
                              a.at("rewards").get<std::vector<double>>(), a.at("horizon").get<int>(),
                              a.at("terminal_obs").get<std::vector<std::string>>());
    r.layers = j.at("layers").get<std::vector<std::vector<int>>>();
    r.initial_state = j.at("initial_state").get<int>();
    r.state_support = j.at("state_support").get<std::vector<uint64_t>>();
    int total = 0;
    for (const auto& layer : r.layers) total += static_cast<int>(layer.size());
    r.state_layer.assign(total, 0);
    for (size_t t = 0; t < r.layers.size(); ++t)
        for (int q : r.layers[t]) r.state_layer[q] = static_cast<int>(t);
    for (const auto& row : j.at("transitions"))
        r.transitions[key(row[0].get<int>(), row[1].get<SymbolId>(), row[2].get<SymbolId>())] =
            row[3].get<int>();
    const json& prov = j.at("provenance");
    r.tester = prov.value("tester", "");
    r.delta = prov.value("delta", 0.0);
    auto fam = prov.value("family", std::vector<int>{0, 0, 0});
    if (fam.size() == 3) {
        r.fam_i = fam[0];
        r.fam_j = fam[1];
        r.fam_k = fam[2];
    }
    r.dataset_fingerprint = prov.value("dataset_fingerprint", 0ull);
    r.seed = prov.value("seed", 0ull);
    r.dataset_episodes = prov.value("dataset_episodes", 0ull);
    return r;
}

std::string LearnStats::to_json() const {
    json j;
    j["total_states"] = total_states;
    j["total_tests"] = total_tests;
    j["total_merges"] = total_merges;
    j["learn_seconds"] = learn_seconds;
    json rows = json::array();
    for (const LayerStats& ls : layers)
        rows.push_back(json{{"layer", ls.layer},
                            {"states", ls.states},
                            {"merges", ls.merges},
                            {"tests", ls.tests},
                            {"min_candidate", ls.min_candidate},
                            {"max_candidate", ls.max_candidate}});
    j["layers"] = std::move(rows);
    return j.dump(2);
}

std::string test_log_to_jsonl(std::span<const TestLogEntry> log) {
    std::ostringstream out;
    for (const TestLogEntry& e : log) {
        json j{{"t", e.t},          {"suffix_steps", e.suffix_steps}, {"parent", e.parent},
               {"action", e.action}, {"obs", e.obs},                  {"against", e.against},
               {"distance", e.distance}, {"threshold", e.threshold},  {"distinct", e.distinct}};
        out << j.dump() << '\n';
    }
    return out.str();
}

}  // namespace rdpforge
