#pragma once

// The five benchmark environments, their behavior policies, ground-truth
// machines (corridor, T-maze, synthetic), and seeded dataset generation.

#include <map>
#include <memory>
#include <string>

#include "rdpforge/alphabet.hpp"
#include "rdpforge/ground_truth.hpp"
#include "rdpforge/rng.hpp"

namespace rdpforge {

class Environment {
public:
    virtual ~Environment() = default;
    const std::string& name() const { return name_; }
    const AlphabetSpec& alphabet() const { return alphabet_; }
    virtual std::unique_ptr<Environment> clone() const = 0;

    // Episode protocol: start() emits the dummy step's observation/reward,
    // then step() is called for t = 1..H-1. The driver appends the terminal
    // step itself.
    virtual std::pair<SymbolId, SymbolId> start(Rng& rng) = 0;
    virtual std::pair<SymbolId, SymbolId> step(SymbolId action, Rng& rng) = 0;

    // Ground-truth machine state tracked during simulation, when available.
    virtual int gt_state() const { return -1; }
    virtual const GroundTruthRdp* gt_machine() const { return nullptr; }

protected:
    std::string name_;
    AlphabetSpec alphabet_;
};

struct EnvParams {
    int horizon = 5;
    std::map<std::string, double> extra;  // e.g. {"length", 4} / {"corridor", 3}

    double get(const std::string& key, double fallback) const {
        auto it = extra.find(key);
        return it == extra.end() ? fallback : it->second;
    }
};

// name in {corridor, tmaze, cookie, cheese, minihall}
std::unique_ptr<Environment> make_env(const std::string& name, const EnvParams& params);

// Exact layered machine; corridor and tmaze (plus rdp-backed envs) only.
const GroundTruthRdp& ground_truth_rdp(const Environment& env);

BehaviorPolicy uniform_policy(const Environment& env);
// The policy used for dataset generation in the benchmark runs.
BehaviorPolicy default_behavior_policy(const Environment& env);

Dataset generate_dataset(const Environment& env, const BehaviorPolicy& policy,
                         size_t n_episodes, uint64_t seed);

// Machine builders (exposed for oracle studies and tests). p_high is the
// probability that the enemy patrols its current row; 1.0 is deterministic.
GroundTruthRdp corridor_machine(int horizon, int length, double p_high);
GroundTruthRdp tmaze_machine(int horizon, int corridor_length);

// Epsilon-greedy dodge toward the row the enemy does not patrol, inferred
// per machine state; uniform at layers without an enemy signal.
BehaviorPolicy corridor_dodge_policy(const GroundTruthRdp& machine, double eps);

// Simulator over an explicit machine: used for corridor, tmaze and the
// synthetic instances of the oracle tests.
class RdpBackedEnv : public Environment {
public:
    RdpBackedEnv(std::string name, GroundTruthRdp machine);
    std::unique_ptr<Environment> clone() const override;
    std::pair<SymbolId, SymbolId> start(Rng& rng) override;
    std::pair<SymbolId, SymbolId> step(SymbolId action, Rng& rng) override;
    int gt_state() const override { return state_; }
    const GroundTruthRdp* gt_machine() const override { return machine_.get(); }

private:
    std::pair<SymbolId, SymbolId> emit(SymbolId action, Rng& rng);
    std::shared_ptr<const GroundTruthRdp> machine_;
    int state_ = 0;
};

// Random layered instances for the minimality studies: layer sizes in
// [2, max_states_per_layer], outputs separated so that prefix
// distinguishability stays above mu_floor (checked by the caller's oracle).
GroundTruthRdp synthetic_machine(int horizon, int max_states_per_layer, uint64_t seed);

}  // namespace rdpforge
