#pragma once

// Benchmark harness: runs the gen -> learn -> plan -> eval pipeline per
// (domain, tester) cell with a wall-clock budget and renders Table output.

#include <optional>
#include <string>
#include <vector>

#include "rdpforge/env.hpp"
#include "rdpforge/learner.hpp"
#include "rdpforge/planner.hpp"

namespace rdpforge {

struct PipelineConfig {
    std::string env_name = "corridor";
    EnvParams params;
    std::string policy = "default";  // default | uniform | drift | dodge
    size_t n_episodes = 10000;
    size_t eval_episodes = 1000;
    double delta = 0.05;
    TesterConfig tester;
    uint64_t seed = 7;
    double budget_seconds = 1800.0;
};

struct PipelineResult {
    LearnResult learn;
    RegularPolicy policy;
    EvalResult eval;
    double gen_seconds = 0.0;
};

BehaviorPolicy resolve_policy(const Environment& env, const std::string& name);

// In-memory pipeline; throws BudgetError when learning runs over budget.
PipelineResult run_pipeline(const PipelineConfig& config);

struct BenchCell {
    std::string domain;
    int horizon = 0;
    std::string tester;
    bool ok = false;
    bool budget_exceeded = false;
    std::string error;
    int states = 0;
    double mean_return = 0.0;
    double stderr_return = 0.0;
    double learn_seconds = 0.0;
    size_t fallback_steps = 0;
    uint64_t seed = 0;
    size_t n_episodes = 0;
};

struct BenchTable {
    std::vector<BenchCell> cells;
    std::string to_markdown() const;
    std::string to_json() const;
};

// The per-domain defaults used for the benchmark reproduction.
PipelineConfig bench_cell_config(const std::string& domain, TesterKind tester, uint64_t seed);

// Runs the named domains (all five when empty) against the given testers.
BenchTable run_bench(const std::vector<std::string>& domains,
                     const std::vector<TesterKind>& testers, double budget_seconds,
                     uint64_t seed);

}  // namespace rdpforge
