#pragma once

// AdaCT-H state merging: builds the layered state set and transition function
// from a dataset, promoting or merging candidates via the configured test.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rdpforge/alphabet.hpp"
#include "rdpforge/metrics.hpp"

namespace rdpforge {

struct LearnedRdp {
    AlphabetSpec alphabet;
    std::vector<std::vector<int>> layers;  // t = 0..H+1
    std::vector<int> state_layer;
    std::unordered_map<uint64_t, int> transitions;  // key(q, a, obs) -> q'
    int initial_state = 0;
    std::vector<uint64_t> state_support;  // suffix-store size per state

    // provenance
    std::string tester;
    double delta = 0.0;
    int fam_i = 0, fam_j = 0, fam_k = 0;
    uint64_t dataset_fingerprint = 0;
    uint64_t seed = 0;
    uint64_t dataset_episodes = 0;

    static uint64_t key(int q, SymbolId a, SymbolId obs) {
        return (static_cast<uint64_t>(q) << 32) | (static_cast<uint64_t>(a) << 24) |
               static_cast<uint64_t>(obs);
    }
    int num_states() const { return static_cast<int>(state_layer.size()); }
    std::optional<int> next_state(int q, SymbolId a, SymbolId obs) const;

    std::string to_json() const;
    static LearnedRdp from_json(const std::string& text);
};

// Folds the transition map over a history prefix; nullopt when a transition
// was never observed at learning time.
std::optional<int> map_history(const LearnedRdp& rdp, std::span<const Step> history);

struct LayerStats {
    int layer = 0;
    int states = 0;
    uint64_t merges = 0;
    uint64_t tests = 0;
    uint64_t min_candidate = 0;
    uint64_t max_candidate = 0;
};

struct LearnStats {
    std::vector<LayerStats> layers;
    int total_states = 0;
    uint64_t total_tests = 0;
    uint64_t total_merges = 0;
    double learn_seconds = 0.0;
    std::string to_json() const;
};

struct TestLogEntry {
    int t = 0;
    int suffix_steps = 0;
    int parent = 0;
    SymbolId action = 0;
    SymbolId obs = 0;
    int against = 0;
    double distance = 0.0;
    double threshold = 0.0;
    bool distinct = false;
};

std::string test_log_to_jsonl(std::span<const TestLogEntry> log);

struct LearnResult {
    LearnedRdp rdp;
    LearnStats stats;
    std::vector<TestLogEntry> test_log;
};

// deadline, when set, aborts with BudgetError once exceeded between layers
// or candidate batches.
LearnResult adact_h(const Dataset& dataset, double delta, const TesterConfig& tester,
                    uint64_t seed = 0,
                    std::optional<std::chrono::steady_clock::time_point> deadline = {});

}  // namespace rdpforge
