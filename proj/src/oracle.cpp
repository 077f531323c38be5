#include "rdpforge/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace rdpforge {

TraceDist exact_suffix_distribution(const GroundTruthRdp& rdp, const BehaviorPolicy& policy,
                                    int state, size_t path_cap) {
    const AlphabetSpec& al = rdp.alphabet;
    const int H = al.horizon();
    const int t0 = rdp.state_layer[state];
    if (t0 > H) throw UsageError("suffix distribution: state is past the last emitting layer");

    TraceDist dist;
    dist.suffix_steps = H - t0 + 1;
    std::vector<int32_t> trace;
    size_t paths = 0;

    auto walk = [&](auto&& self, int q, int t, double mass) -> void {
        if (t > H) {
            dist.items.emplace_back(trace, mass);
            return;
        }
        if (++paths > path_cap)
            throw LimitError("suffix distribution enumeration exceeded the path cap");
        const bool start_layer = (t0 == 0 && t == 0);
        const int actions = start_layer ? 1 : al.num_actions();
        auto probs = policy.probs(q);
        for (int ai = 0; ai < actions; ++ai) {
            SymbolId a = start_layer ? al.start_action() : static_cast<SymbolId>(ai);
            double pa = start_layer ? 1.0 : probs[ai];
            if (pa <= 0.0) continue;
            for (const Emission& e : rdp.emissions(q, a)) {
                if (e.prob <= 0.0) continue;
                trace.push_back(al.step_sym(a, e.obs, e.reward));
                self(self, rdp.next_state(q, a, e.obs), t + 1, mass * pa * e.prob);
                trace.pop_back();
            }
        }
    };
    walk(walk, state, t0, 1.0);

    // Merge duplicate traces (different hidden paths can emit the same trace).
    std::sort(dist.items.begin(), dist.items.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<std::pair<std::vector<int32_t>, double>> merged;
    for (auto& item : dist.items) {
        if (!merged.empty() && merged.back().first == item.first)
            merged.back().second += item.second;
        else
            merged.push_back(std::move(item));
    }
    dist.items = std::move(merged);
    return dist;
}

double exact_prefix_linf(const TraceDist& a, const TraceDist& b) {
    if (a.suffix_steps != b.suffix_steps)
        throw UsageError("prefix distance: different suffix lengths");
    double best = 0.0;
    for (int u = 1; u <= a.suffix_steps; ++u) {
        std::map<std::vector<int32_t>, std::pair<double, double>> acc;
        for (const auto& [trace, p] : a.items)
            acc[std::vector<int32_t>(trace.begin(), trace.begin() + u)].first += p;
        for (const auto& [trace, p] : b.items)
            acc[std::vector<int32_t>(trace.begin(), trace.begin() + u)].second += p;
        for (const auto& [_, pq] : acc) best = std::max(best, std::abs(pq.first - pq.second));
    }
    return best;
}

double exact_lang_metric(const AlphabetSpec& alphabet, const LanguageFamily& family,
                         const TraceDist& a, const TraceDist& b) {
    std::vector<double> pa(family.size(), 0.0), pb(family.size(), 0.0);
    std::vector<int32_t> tokens;
    for (const auto& [trace, p] : a.items) {
        expand_step_trace(alphabet, trace, tokens);
        for (size_t x = 0; x < family.size(); ++x)
            if (contains(*family.langs[x], tokens)) pa[x] += p;
    }
    for (const auto& [trace, p] : b.items) {
        expand_step_trace(alphabet, trace, tokens);
        for (size_t x = 0; x < family.size(); ++x)
            if (contains(*family.langs[x], tokens)) pb[x] += p;
    }
    double best = 0.0;
    for (size_t x = 0; x < family.size(); ++x) best = std::max(best, std::abs(pa[x] - pb[x]));
    return best;
}

std::vector<char> reachable_states(const GroundTruthRdp& rdp, const BehaviorPolicy& policy) {
    std::vector<char> reach(rdp.num_states(), 0);
    reach[rdp.initial_state] = 1;
    const AlphabetSpec& al = rdp.alphabet;
    for (int t = 0; t <= al.horizon(); ++t) {
        for (int q : rdp.layers[t]) {
            if (!reach[q]) continue;
            const bool start = (t == 0);
            const int actions = start ? 1 : al.num_actions();
            auto probs = policy.probs(q);
            for (int ai = 0; ai < actions; ++ai) {
                SymbolId a = start ? al.start_action() : static_cast<SymbolId>(ai);
                if (!start && probs[ai] <= 0.0) continue;
                for (const Emission& e : rdp.emissions(q, a))
                    if (e.prob > 0.0) reach[rdp.next_state(q, a, e.obs)] = 1;
            }
        }
    }
    return reach;
}

namespace {

double dist_of(const AlphabetSpec& alphabet, const TesterConfig& tester, const TraceDist& a,
               const TraceDist& b, const LanguageFamily* family) {
    if (tester.kind == TesterKind::Language) return exact_lang_metric(alphabet, *family, a, b);
    return exact_prefix_linf(a, b);
}

}  // namespace

LayerDistinguishability distinguishability_oracle(const GroundTruthRdp& rdp,
                                                  const BehaviorPolicy& policy,
                                                  const TesterConfig& tester, size_t path_cap) {
    const AlphabetSpec& al = rdp.alphabet;
    const int H = al.horizon();
    const double inf = std::numeric_limits<double>::infinity();
    LayerDistinguishability out;
    out.per_layer.assign(H + 2, inf);
    out.overall = inf;

    std::vector<char> reach = reachable_states(rdp, policy);
    for (int t = 1; t <= H; ++t) {
        std::vector<int> states;
        for (int q : rdp.layers[t])
            if (reach[q]) states.push_back(q);
        if (states.size() < 2) continue;
        std::vector<TraceDist> dists;
        dists.reserve(states.size());
        for (int q : states)
            dists.push_back(exact_suffix_distribution(rdp, policy, q, path_cap));
        LanguageFamily family;
        if (tester.kind == TesterKind::Language)
            family = build_family(al, tester.fam_i, tester.fam_j, tester.fam_k,
                                  (H - t + 1) * al.tokens_per_step(), tester.family_cap);
        double layer_min = inf;
        for (size_t i = 0; i < states.size(); ++i)
            for (size_t j = i + 1; j < states.size(); ++j)
                layer_min = std::min(
                    layer_min, dist_of(al, tester, dists[i], dists[j],
                                       tester.kind == TesterKind::Language ? &family : nullptr));
        out.per_layer[t] = layer_min;
        out.overall = std::min(out.overall, layer_min);
    }
    return out;
}

int state_of_history(const GroundTruthRdp& rdp,
                     const std::vector<std::pair<SymbolId, SymbolId>>& history) {
    int q = rdp.initial_state;
    for (const auto& [a, obs] : history) q = rdp.next_state(q, a, obs);
    return q;
}

double oracle_pair_distance(const GroundTruthRdp& rdp, const BehaviorPolicy& policy,
                            const std::vector<std::pair<SymbolId, SymbolId>>& history1,
                            const std::vector<std::pair<SymbolId, SymbolId>>& history2,
                            const TesterConfig& tester, size_t path_cap) {
    int q1 = state_of_history(rdp, history1);
    int q2 = state_of_history(rdp, history2);
    if (rdp.state_layer[q1] != rdp.state_layer[q2])
        throw UsageError("pair distance: histories reach different layers");
    TraceDist d1 = exact_suffix_distribution(rdp, policy, q1, path_cap);
    TraceDist d2 = exact_suffix_distribution(rdp, policy, q2, path_cap);
    LanguageFamily family;
    const AlphabetSpec& al = rdp.alphabet;
    if (tester.kind == TesterKind::Language)
        family = build_family(al, tester.fam_i, tester.fam_j, tester.fam_k,
                              d1.suffix_steps * al.tokens_per_step(), tester.family_cap);
    return dist_of(al, tester, d1, d2, tester.kind == TesterKind::Language ? &family : nullptr);
}

}  // namespace rdpforge
