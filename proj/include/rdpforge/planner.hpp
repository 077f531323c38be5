#pragma once

// Output-distribution estimation on a learned automaton, backward-induction
// planning, and policy evaluation in the simulator.

#include <unordered_map>
#include <vector>

#include "rdpforge/env.hpp"
#include "rdpforge/learner.hpp"

namespace rdpforge {

struct EstimatedOutputs {
    // visit[q][a], obs_counts[q][a][obs], reward_counts[q][a][r]; sparse maps
    // keyed the same way as the automaton transitions.
    std::unordered_map<uint64_t, uint64_t> visits;            // (q, a)
    std::unordered_map<uint64_t, uint64_t> obs_counts;        // (q, a, obs)
    std::unordered_map<uint64_t, uint64_t> reward_counts;     // (q, a, r)

    static uint64_t ka(int q, SymbolId a) {
        return (static_cast<uint64_t>(q) << 16) | static_cast<uint64_t>(a);
    }
    uint64_t visit(int q, SymbolId a) const {
        auto it = visits.find(ka(q, a));
        return it == visits.end() ? 0 : it->second;
    }
    double theta_o(int q, SymbolId a, SymbolId obs) const;
    double theta_r_mean(int q, SymbolId a, const AlphabetSpec& alphabet) const;
};

// Routes every episode through map_history and counts the emissions.
EstimatedOutputs estimate_outputs(const LearnedRdp& rdp, const Dataset& dataset);

struct RegularPolicy {
    std::vector<SymbolId> action;  // per learned state; -1 where undefined
    std::vector<double> value;     // V(q)
    double initial_value = 0.0;
    int unbacked_states = 0;  // reachable states with no visited action

    std::string to_json(const LearnedRdp& rdp) const;
};

// Certainty-equivalent backward induction; unseen transitions and actions
// fall into a zero-value sink.
RegularPolicy value_iteration(const LearnedRdp& rdp, const EstimatedOutputs& outputs);

struct EvalResult {
    double mean_return = 0.0;
    double stderr_return = 0.0;
    size_t episodes = 0;
    size_t fallback_steps = 0;  // steps taken without a known transition
};

// Runs the policy online, tracking the learned state; when a transition is
// missing the previous action is repeated and the step counted.
EvalResult evaluate_policy(const Environment& env, const LearnedRdp& rdp,
                           const RegularPolicy& policy, size_t n_episodes, uint64_t seed);

}  // namespace rdpforge
