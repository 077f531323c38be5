#include "rdpforge/bench.hpp"

#include <chrono>
#include <sstream>

#include <json.hpp>

namespace rdpforge {

using nlohmann::json;

BehaviorPolicy resolve_policy(const Environment& env, const std::string& name) {
    if (name == "default") return default_behavior_policy(env);
    if (name == "uniform") return uniform_policy(env);
    if (name == "drift") {
        if (env.alphabet().num_actions() != 4)
            throw UsageError("policy 'drift' needs a four-action environment");
        return BehaviorPolicy::fixed_dist("drift", {0.25, 0.15, 0.35, 0.25});
    }
    if (name == "dodge") return corridor_dodge_policy(ground_truth_rdp(env), 0.2);
    throw UsageError("unknown policy '" + name + "' (default, uniform, drift, dodge)");
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    auto env = make_env(config.env_name, config.params);
    BehaviorPolicy behavior = resolve_policy(*env, config.policy);

    auto t0 = std::chrono::steady_clock::now();
    Dataset data = generate_dataset(*env, behavior, config.n_episodes, config.seed);
    auto t1 = std::chrono::steady_clock::now();

    std::optional<std::chrono::steady_clock::time_point> deadline;
    if (config.budget_seconds > 0)
        deadline = t1 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(config.budget_seconds));

    PipelineResult out;
    out.gen_seconds = std::chrono::duration<double>(t1 - t0).count();
    out.learn = adact_h(data, config.delta, config.tester, config.seed, deadline);
    EstimatedOutputs est = estimate_outputs(out.learn.rdp, data);
    out.policy = value_iteration(out.learn.rdp, est);
    out.eval = evaluate_policy(*env, out.learn.rdp, out.policy, config.eval_episodes,
                               derive_seed(config.seed, 0xe7a1ull));
    return out;
}

PipelineConfig bench_cell_config(const std::string& domain, TesterKind tester, uint64_t seed) {
    PipelineConfig c;
    c.env_name = domain;
    c.tester.kind = tester;
    c.tester.sketched_stores = (tester == TesterKind::PrefixCms);
    c.seed = seed;
    c.delta = 0.05;
    c.eval_episodes = 1000;
    if (domain == "corridor") {
        c.params.horizon = 5;
        c.params.extra["length"] = 4;
        c.n_episodes = 10000;
    } else if (domain == "tmaze") {
        c.params.horizon = 5;
        c.params.extra["corridor"] = 3;
        c.n_episodes = 100000;
    } else if (domain == "cookie") {
        c.params.horizon = 9;
        c.n_episodes = 100000;
    } else if (domain == "cheese") {
        c.params.horizon = 6;
        c.n_episodes = 100000;
    } else if (domain == "minihall") {
        c.params.horizon = 15;
        c.n_episodes = 100000;
    } else {
        throw UsageError("bench: unknown domain '" + domain + "'");
    }
    return c;
}

BenchTable run_bench(const std::vector<std::string>& domains,
                     const std::vector<TesterKind>& testers, double budget_seconds,
                     uint64_t seed) {
    std::vector<std::string> names =
        domains.empty() ? std::vector<std::string>{"corridor", "tmaze", "cookie", "cheese",
                                                   "minihall"}
                        : domains;
    BenchTable table;
    for (const std::string& domain : names) {
        for (TesterKind tester : testers) {
            PipelineConfig config = bench_cell_config(domain, tester, seed);
            config.budget_seconds = budget_seconds;
            BenchCell cell;
            cell.domain = domain;
            cell.horizon = config.params.horizon;
            cell.tester = tester_kind_name(tester);
            cell.seed = seed;
            cell.n_episodes = config.n_episodes;
            try {
                PipelineResult r = run_pipeline(config);
                cell.ok = true;
                cell.states = r.learn.rdp.num_states();
                cell.mean_return = r.eval.mean_return;
                cell.stderr_return = r.eval.stderr_return;
                cell.learn_seconds = r.learn.stats.learn_seconds;
                cell.fallback_steps = r.eval.fallback_steps;
            } catch (const BudgetError&) {
                cell.budget_exceeded = true;
                cell.error = "budget exceeded";
            } catch (const std::exception& ex) {
                cell.error = ex.what();
            }
            table.cells.push_back(std::move(cell));
        }
    }
    return table;
}

namespace {

std::string fmt(double v, int digits) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

}  // namespace

std::string BenchTable::to_markdown() const {
    std::ostringstream out;
    out << "| domain | H | tester | Q | r | time_s |\n";
    out << "|---|---|---|---|---|---|\n";
    for (const BenchCell& c : cells) {
        out << "| " << c.domain << " | " << c.horizon << " | " << c.tester << " | ";
        if (c.ok)
            out << c.states << " | " << fmt(c.mean_return, 2) << " ± " << fmt(c.stderr_return, 2)
                << " | " << fmt(c.learn_seconds, 2);
        else
            out << "- | - | -";
        out << " |\n";
    }
    return out.str();
}

std::string BenchTable::to_json() const {
    json rows = json::array();
    for (const BenchCell& c : cells) {
        json row{{"domain", c.domain}, {"H", c.horizon},          {"tester", c.tester},
                 {"ok", c.ok},         {"seed", c.seed},          {"episodes", c.n_episodes},
                 {"budget_exceeded", c.budget_exceeded}};
        if (c.ok) {
            row["Q"] = c.states;
            row["r"] = c.mean_return;
            row["r_stderr"] = c.stderr_return;
            row["time_s"] = c.learn_seconds;
            row["fallback_steps"] = c.fallback_steps;
        } else if (!c.error.empty()) {
            row["error"] = c.error;
        }
        rows.push_back(std::move(row));
    }
    return json{{"cells", std::move(rows)}}.dump(2);
}

}  // namespace rdpforge
