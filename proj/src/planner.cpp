#include "rdpforge/planner.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include <json.hpp>

namespace rdpforge {

using nlohmann::json;

double EstimatedOutputs::theta_o(int q, SymbolId a, SymbolId obs) const {
    uint64_t n = visit(q, a);
    if (n == 0) return 0.0;
    auto it = obs_counts.find(LearnedRdp::key(q, a, obs));
    if (it == obs_counts.end()) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(n);
}

double EstimatedOutputs::theta_r_mean(int q, SymbolId a, const AlphabetSpec& alphabet) const {
    uint64_t n = visit(q, a);
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (SymbolId r = 0; r < alphabet.num_rewards(); ++r) {
        auto it = reward_counts.find(LearnedRdp::key(q, a, r));
        if (it != reward_counts.end())
            sum += static_cast<double>(it->second) * alphabet.reward_value(r);
    }
    return sum / static_cast<double>(n);
}

EstimatedOutputs estimate_outputs(const LearnedRdp& rdp, const Dataset& dataset) {
    if (!(dataset.alphabet == rdp.alphabet))
        throw UsageError("estimate_outputs: dataset alphabet does not match the automaton");
    EstimatedOutputs out;
    const int H = rdp.alphabet.horizon();
    for (const Episode& e : dataset.episodes) {
        int q = rdp.initial_state;
        for (int t = 0; t <= H; ++t) {
            const Step& s = e.steps[t];
            ++out.visits[EstimatedOutputs::ka(q, s.action)];
            ++out.obs_counts[LearnedRdp::key(q, s.action, s.obs)];
            ++out.reward_counts[LearnedRdp::key(q, s.action, s.reward)];
            auto next = rdp.next_state(q, s.action, s.obs);
            if (!next) break;  // unseen route; stop counting this episode
            q = *next;
        }
    }
    return out;
}

RegularPolicy value_iteration(const LearnedRdp& rdp, const EstimatedOutputs& outputs) {
    const AlphabetSpec& al = rdp.alphabet;
    const int H = al.horizon();
    RegularPolicy pol;
    pol.action.assign(rdp.num_states(), -1);
    pol.value.assign(rdp.num_states(), 0.0);

    // Backward over layers; layer H+1 keeps value 0.
    for (int t = H; t >= 0; --t) {
        for (int q : rdp.layers[t]) {
            double best_value = 0.0;
            SymbolId best_action = -1;
            const int actions = (t == 0) ? 1 : al.num_actions();
            for (int ai = 0; ai < actions; ++ai) {
                SymbolId a = (t == 0) ? al.start_action() : static_cast<SymbolId>(ai);
                uint64_t n = outputs.visit(q, a);
                if (n == 0) continue;  // never tried here: fall through to the sink
                double qv = outputs.theta_r_mean(q, a, al);
                for (SymbolId obs = 0; obs < al.num_obs(); ++obs) {
                    double po = outputs.theta_o(q, a, obs);
                    if (po <= 0.0) continue;
                    auto next = rdp.next_state(q, a, obs);
                    if (next) qv += po * pol.value[*next];
                    // missing transitions contribute the zero-value sink
                }
                if (best_action < 0 || qv > best_value) {
                    best_value = qv;
                    best_action = a;
                }
            }
            if (best_action < 0) {
                ++pol.unbacked_states;
                pol.value[q] = 0.0;
            } else {
                pol.value[q] = best_value;
                pol.action[q] = best_action;
            }
        }
    }
    if (pol.unbacked_states > 0)
        std::cerr << "[rdpforge] warning: " << pol.unbacked_states
                  << " states had no visited action and were assigned sink value\n";
    pol.initial_value = pol.value[rdp.initial_state];
    return pol;
}

std::string RegularPolicy::to_json(const LearnedRdp& rdp) const {
    json actions = json::object();
    for (int q = 0; q < rdp.num_states(); ++q)
        if (action[q] >= 0 && action[q] != rdp.alphabet.start_action())
            actions[std::to_string(q)] = rdp.alphabet.action_name(action[q]);
    return json{{"initial_value", initial_value},
                {"actions", std::move(actions)},
                {"unbacked_states", unbacked_states}}
        .dump(2);
}

EvalResult evaluate_policy(const Environment& env, const LearnedRdp& rdp,
                           const RegularPolicy& policy, size_t n_episodes, uint64_t seed) {
    if (!(env.alphabet() == rdp.alphabet))
        throw UsageError("evaluate_policy: environment alphabet does not match the automaton");
    if (n_episodes < 1) throw UsageError("evaluate_policy: need at least one episode");
    const AlphabetSpec& al = rdp.alphabet;
    const int H = al.horizon();

    EvalResult res;
    res.episodes = n_episodes;
    double sum = 0.0, sumsq = 0.0;
    std::unique_ptr<Environment> sim = env.clone();
    for (size_t i = 0; i < n_episodes; ++i) {
        Rng rng(derive_seed(seed, 0xe7a1u + i));
        auto [o0, r0] = sim->start(rng);
        double ret = al.reward_value(r0);
        std::optional<int> q = rdp.next_state(rdp.initial_state, al.start_action(), o0);
        SymbolId last_action = 0;
        for (int t = 1; t <= H - 1; ++t) {
            SymbolId a;
            if (q && policy.action[*q] >= 0) {
                a = policy.action[*q];
            } else {
                a = last_action;  // fallback: repeat the previous action
                ++res.fallback_steps;
            }
            auto [obs, r] = sim->step(a, rng);
            ret += al.reward_value(r);
            if (q) q = rdp.next_state(*q, a, obs);
            last_action = a;
        }
        sum += ret;
        sumsq += ret * ret;
    }
    res.mean_return = sum / static_cast<double>(n_episodes);
    if (n_episodes > 1) {
        double var = (sumsq - sum * sum / static_cast<double>(n_episodes)) /
                     static_cast<double>(n_episodes - 1);
        res.stderr_return = std::sqrt(std::max(var, 0.0) / static_cast<double>(n_episodes));
    }
    return res;
}

}  // namespace rdpforge
