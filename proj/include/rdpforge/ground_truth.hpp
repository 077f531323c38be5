#pragma once

// Layered acyclic Moore machines with known output distributions, used as
// ground truth for the benchmark environments and for oracle tests.

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "rdpforge/alphabet.hpp"

namespace rdpforge {

struct Emission {
    SymbolId obs = 0;
    SymbolId reward = 0;
    double prob = 0.0;
};

struct GroundTruthRdp {
    AlphabetSpec alphabet;
    std::string name;

    // layers[t] lists the global state ids of layer t, t = 0..H+1.
    std::vector<std::vector<int>> layers;
    std::vector<int> state_layer;  // state id -> layer

    // outputs[q][a]: joint distribution over (obs, reward). At layer 0 only
    // the start action is defined; at layer H every action emits the terminal
    // observation with reward 0.
    std::vector<std::vector<std::vector<Emission>>> outputs;

    std::unordered_map<uint64_t, int> transitions;  // key(q, a, obs) -> state
    int initial_state = 0;

    static uint64_t key(int q, SymbolId a, SymbolId obs) {
        return (static_cast<uint64_t>(q) << 32) | (static_cast<uint64_t>(a) << 24) |
               static_cast<uint64_t>(obs);
    }

    int num_states() const { return static_cast<int>(state_layer.size()); }
    int next_state(int q, SymbolId a, SymbolId obs) const;
    // Actions available from q (the start action at layer 0, real ones after).
    int actions_at(int q) const;
    const std::vector<Emission>& emissions(int q, SymbolId a) const;

    double theta_o(int q, SymbolId a, SymbolId obs) const;
    double theta_r(int q, SymbolId a, SymbolId reward) const;

    // Checks layering, probability normalization, transition completeness.
    void validate() const;
};

struct BehaviorPolicy {
    std::string name;
    // State-independent distribution over real actions, or a per-state table
    // indexed by ground-truth state id.
    std::vector<double> fixed;
    std::vector<std::vector<double>> table;

    bool state_backed() const { return !table.empty(); }
    std::span<const double> probs(int gt_state) const {
        if (state_backed()) return table[gt_state];
        return fixed;
    }

    static BehaviorPolicy uniform(const AlphabetSpec& alphabet);
    static BehaviorPolicy fixed_dist(std::string name, std::vector<double> action_probs);
};

// Merges states with identical outputs and successor classes, layer by layer
// from the back. The result has the same trace distribution under any policy.
GroundTruthRdp minimize_layered(const GroundTruthRdp& rdp);

// Copy of the machine with every reward label replaced by reward id 0.
GroundTruthRdp strip_rewards(const GroundTruthRdp& rdp);

}  // namespace rdpforge
