#pragma once

// Exact suffix-trace distributions of ground-truth states under a regular
// policy, and the distinguishability they induce per layer. No sampling:
// the support is enumerated directly, guarded by a path cap.

#include <cstdint>
#include <vector>

#include "rdpforge/ground_truth.hpp"
#include "rdpforge/metrics.hpp"

namespace rdpforge {

// Distribution over step-symbol suffix traces, sorted by trace.
struct TraceDist {
    int suffix_steps = 0;
    std::vector<std::pair<std::vector<int32_t>, double>> items;
};

// Distribution over e_{t:H} for a state in layer t; enumerates every
// positive-probability trace (throws LimitError past the cap).
TraceDist exact_suffix_distribution(const GroundTruthRdp& rdp, const BehaviorPolicy& policy,
                                    int state, size_t path_cap = 2000000);

double exact_prefix_linf(const TraceDist& a, const TraceDist& b);
double exact_lang_metric(const AlphabetSpec& alphabet, const LanguageFamily& family,
                         const TraceDist& a, const TraceDist& b);

struct LayerDistinguishability {
    // One entry per layer 0..H+1; +infinity where fewer than two states are
    // reachable, the minimum pairwise distance otherwise.
    std::vector<double> per_layer;
    double overall;  // min over layers with at least one pair
};

// For the language metric the family is rebuilt per layer at that layer's
// suffix token length from the tester's (i, j, k) coordinates; the prefix
// metrics ignore the coordinates.
LayerDistinguishability distinguishability_oracle(const GroundTruthRdp& rdp,
                                                  const BehaviorPolicy& policy,
                                                  const TesterConfig& tester,
                                                  size_t path_cap = 2000000);

// States with positive occupancy under the policy.
std::vector<char> reachable_states(const GroundTruthRdp& rdp, const BehaviorPolicy& policy);

// Distance between the suffix distributions of the two states reached by the
// given histories (sequences of (action, obs) pairs from the initial state).
double oracle_pair_distance(const GroundTruthRdp& rdp, const BehaviorPolicy& policy,
                            const std::vector<std::pair<SymbolId, SymbolId>>& history1,
                            const std::vector<std::pair<SymbolId, SymbolId>>& history2,
                            const TesterConfig& tester, size_t path_cap = 2000000);

int state_of_history(const GroundTruthRdp& rdp,
                     const std::vector<std::pair<SymbolId, SymbolId>>& history);

}  // namespace rdpforge
