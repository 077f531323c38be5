// Command-line entry point: dataset generation, learning, evaluation and the
// benchmark harness. Flags override config-file values override defaults.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdpforge/bench.hpp"
#include "rdpforge/dataset_io.hpp"
#include "rdpforge/env.hpp"
#include "rdpforge/learner.hpp"
#include "rdpforge/planner.hpp"

namespace {

using namespace rdpforge;
using nlohmann::json;

int log_level() {
    const char* env = std::getenv("RDP_FORGE_LOG");
    if (!env) return 0;
    std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[rdpforge] " << msg << "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out << content;
}

EnvParams make_params(int horizon, const std::vector<std::string>& raw) {
    EnvParams p;
    p.horizon = horizon;
    for (const std::string& kv : raw) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw UsageError("--param expects key=value, got '" + kv + "'");
        p.extra[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return p;
}

TesterConfig make_tester(const std::string& kind, double delta, const std::string& family,
                         int depth_cap, bool sketched) {
    TesterConfig t;
    t.kind = tester_kind_from(kind);
    t.delta = delta;
    if (!family.empty()) {
        std::istringstream in(family);
        char c1, c2;
        if (!(in >> t.fam_i >> c1 >> t.fam_j >> c2 >> t.fam_k) || c1 != ',' || c2 != ',')
            throw UsageError("--family expects i,j,k");
    }
    t.cms_depth_cap = depth_cap;
    t.sketched_stores = sketched || t.kind == TesterKind::PrefixCms;
    t.validate();
    return t;
}

json params_json(const EnvParams& p) {
    json extra = json::object();
    for (const auto& [k, v] : p.extra) extra[k] = v;
    return json{{"horizon", p.horizon}, {"extra", std::move(extra)}};
}

struct CommonFlags {
    std::string env_name = "corridor";
    int horizon = 5;
    std::vector<std::string> params;
    uint64_t seed = 7;
};

int run(int argc, char** argv) {
    CLI::App app{"rdpforge: offline learning of regular decision processes"};
    app.require_subcommand(1);
    app.set_config("--config", "", "JSON/INI config file; flags take precedence");

    // gen
    auto* gen = app.add_subcommand("gen", "generate an episode dataset");
    CommonFlags g;
    std::string gen_out = "dataset.jsonl";
    std::string gen_policy = "default";
    size_t gen_n = 10000;
    gen->add_option("--env", g.env_name, "environment name");
    gen->add_option("--n", gen_n, "number of episodes");
    gen->add_option("--horizon", g.horizon, "episode horizon H");
    gen->add_option("--param", g.params, "extra env parameter key=value");
    gen->add_option("--policy", gen_policy, "behavior policy (default|uniform|drift|dodge)");
    gen->add_option("--seed", g.seed, "master seed");
    gen->add_option("--out", gen_out, "output dataset path");

    // learn
    auto* learn = app.add_subcommand("learn", "learn an automaton from a dataset");
    std::string learn_in = "dataset.jsonl", learn_out = "rdp.json";
    std::string learn_tester = "lang", learn_family = "1,1,1";
    double learn_delta = 0.05;
    int learn_depth_cap = 2;
    bool learn_sketched = false;
    double learn_budget = 0.0;
    uint64_t learn_seed = 7;
    learn->add_option("--in", learn_in, "input dataset path");
    learn->add_option("--out", learn_out, "output automaton path");
    learn->add_option("--tester", learn_tester, "distinctness tester (prefix|cms|lang)");
    learn->add_option("--family", learn_family, "language family indices i,j,k");
    learn->add_option("--delta", learn_delta, "per-test failure probability");
    learn->add_option("--cms-depth-cap", learn_depth_cap,
                      "prefix enumeration depth cap for the cms tester (-1 = full)");
    learn->add_flag("--sketch-stores", learn_sketched,
                    "back suffix stores with sketches (cms tester only)");
    learn->add_option("--budget-s", learn_budget, "learn wall-clock budget, 0 = none");
    learn->add_option("--seed", learn_seed, "seed for sketch hashes");

    // eval
    auto* eval = app.add_subcommand("eval", "plan on a learned automaton and evaluate");
    CommonFlags e;
    std::string eval_rdp = "rdp.json", eval_data = "dataset.jsonl", eval_out = "metrics.json";
    std::string eval_stats;
    size_t eval_n = 1000;
    eval->add_option("--env", e.env_name, "environment name");
    eval->add_option("--horizon", e.horizon, "episode horizon H");
    eval->add_option("--param", e.params, "extra env parameter key=value");
    eval->add_option("--in", eval_rdp, "learned automaton path");
    eval->add_option("--data", eval_data, "dataset used to estimate outputs");
    eval->add_option("--stats", eval_stats, "learn stats JSON (for the time column)");
    eval->add_option("--eval-n", eval_n, "evaluation episodes");
    eval->add_option("--seed", e.seed, "evaluation seed");
    eval->add_option("--out", eval_out, "output metrics path");

    // bench
    auto* bench = app.add_subcommand("bench", "run the benchmark table");
    std::vector<std::string> bench_domains;
    std::vector<std::string> bench_testers = {"cms", "lang"};
    double bench_budget = 1800.0;
    uint64_t bench_seed = 7;
    std::string bench_out = "bench";
    bench->add_option("--domains", bench_domains, "domains to run (default: all five)");
    bench->add_option("--testers", bench_testers, "testers to run");
    bench->add_option("--budget-s", bench_budget, "per-cell learn budget in seconds");
    bench->add_option("--seed", bench_seed, "master seed");
    bench->add_option("--out", bench_out, "output path prefix (.md / .json)");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        EnvParams params = make_params(g.horizon, g.params);
        auto env = make_env(g.env_name, params);
        BehaviorPolicy policy = resolve_policy(*env, gen_policy);
        log_info("generating " + std::to_string(gen_n) + " episodes of " + g.env_name);
        Dataset ds = generate_dataset(*env, policy, gen_n, g.seed);
        save_dataset(ds, gen_out);
        json meta{{"config",
                   {{"command", "gen"},
                    {"env", g.env_name},
                    {"params", params_json(params)},
                    {"n", gen_n},
                    {"policy", gen_policy},
                    {"seed", g.seed},
                    {"out", gen_out}}},
                  {"episodes", ds.episodes.size()},
                  {"fingerprint", ds.fingerprint()}};
        write_file(gen_out + ".meta.json", meta.dump(2) + "\n");
        std::cout << "wrote " << ds.episodes.size() << " episodes to " << gen_out << "\n";
        return 0;
    }

    if (learn->parsed()) {
        TesterConfig tester =
            make_tester(learn_tester, learn_delta, learn_family, learn_depth_cap, learn_sketched);
        Dataset ds = load_dataset(learn_in);
        log_info("learning from " + std::to_string(ds.episodes.size()) + " episodes with tester " +
                 learn_tester);
        std::optional<std::chrono::steady_clock::time_point> deadline;
        if (learn_budget > 0)
            deadline = std::chrono::steady_clock::now() +
                       std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>(learn_budget));
        LearnResult res = adact_h(ds, learn_delta, tester, learn_seed, deadline);
        write_file(learn_out, res.rdp.to_json() + "\n");
        json stats = json::parse(res.stats.to_json());
        stats["config"] = {{"command", "learn"},   {"in", learn_in},
                           {"tester", learn_tester}, {"family", learn_family},
                           {"delta", learn_delta},   {"seed", learn_seed},
                           {"cms_depth_cap", learn_depth_cap}};
        write_file(learn_out + ".stats.json", stats.dump(2) + "\n");
        write_file(learn_out + ".tests.jsonl", test_log_to_jsonl(res.test_log));
        std::cout << "Q=" << res.rdp.num_states() << " learn_seconds=" << res.stats.learn_seconds
                  << " -> " << learn_out << "\n";
        return 0;
    }

    if (eval->parsed()) {
        EnvParams params = make_params(e.horizon, e.params);
        auto env = make_env(e.env_name, params);
        std::ifstream in(eval_rdp, std::ios::binary);
        if (!in) throw Error("cannot open for reading: " + eval_rdp);
        std::stringstream buf;
        buf << in.rdbuf();
        LearnedRdp rdp = LearnedRdp::from_json(buf.str());
        Dataset ds = load_dataset(eval_data);
        EstimatedOutputs outputs = estimate_outputs(rdp, ds);
        RegularPolicy policy = value_iteration(rdp, outputs);
        EvalResult ev = evaluate_policy(*env, rdp, policy, eval_n, derive_seed(e.seed, 0xe7a1ull));
        double learn_seconds = 0.0;
        if (!eval_stats.empty()) {
            std::ifstream sin(eval_stats);
            if (sin) {
                json sj = json::parse(sin, nullptr, false);
                if (!sj.is_discarded()) learn_seconds = sj.value("learn_seconds", 0.0);
            }
        }
        json out{{"config",
                  {{"command", "eval"},
                   {"env", e.env_name},
                   {"params", params_json(params)},
                   {"rdp", eval_rdp},
                   {"data", eval_data},
                   {"eval_n", eval_n},
                   {"seed", e.seed}}},
                 {"Q", rdp.num_states()},
                 {"mean_return", ev.mean_return},
                 {"stderr_return", ev.stderr_return},
                 {"learn_seconds", learn_seconds},
                 {"fallback_steps", ev.fallback_steps},
                 {"initial_value", policy.initial_value}};
        write_file(eval_out, out.dump(2) + "\n");
        std::cout << "Q=" << rdp.num_states() << " r=" << ev.mean_return << " ± "
                  << ev.stderr_return << "\n";
        return 0;
    }

    if (bench->parsed()) {
        std::vector<TesterKind> testers;
        for (const std::string& t : bench_testers) testers.push_back(tester_kind_from(t));
        BenchTable table = run_bench(bench_domains, testers, bench_budget, bench_seed);
        json out = json::parse(table.to_json());
        out["config"] = {{"command", "bench"},
                         {"domains", bench_domains},
                         {"testers", bench_testers},
                         {"budget_s", bench_budget},
                         {"seed", bench_seed}};
        write_file(bench_out + ".json", out.dump(2) + "\n");
        write_file(bench_out + ".md", table.to_markdown());
        std::cout << table.to_markdown();
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const BudgetError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 4;
    } catch (const UsageError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const ConfigError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const ParseError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    }
}
