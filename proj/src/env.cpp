#include "rdpforge/env.hpp"

#include <algorithm>
#include <iostream>
#include <map>

namespace rdpforge {

namespace {

// Incremental machine builder: states are created per layer, emissions and
// transitions attached afterwards.
struct MachineBuilder {
    GroundTruthRdp m;

    explicit MachineBuilder(AlphabetSpec alphabet, std::string name) {
        m.alphabet = std::move(alphabet);
        m.name = std::move(name);
        m.layers.resize(m.alphabet.horizon() + 2);
    }

    int add_state(int layer) {
        int id = static_cast<int>(m.state_layer.size());
        m.state_layer.push_back(layer);
        m.layers[layer].push_back(id);
        m.outputs.emplace_back();
        return id;
    }

    void emit(int q, SymbolId a, SymbolId obs, SymbolId reward, double prob, int next) {
        int ai = (m.state_layer[q] == 0) ? 0 : a;
        if (static_cast<int>(m.outputs[q].size()) <= ai) m.outputs[q].resize(ai + 1);
        m.outputs[q][ai].push_back({obs, reward, prob});
        m.transitions[GroundTruthRdp::key(q, a, obs)] = next;
    }

    // Adds the shared tail: every layer-H state emits the terminal symbol.
    void finish_terminal_layers(int pre_terminal, int final_state) {
        const AlphabetSpec& al = m.alphabet;
        SymbolId r0 = *al.reward_id(0.0);
        for (SymbolId a = 0; a < al.num_actions(); ++a)
            emit(pre_terminal, a, al.terminal_obs(), r0, 1.0, final_state);
    }
};

}  // namespace

GroundTruthRdp corridor_machine(int horizon, int length, double p_high) {
    if (length < 2) throw UsageError("corridor: length must be >= 2");
    if (!(p_high > 0.5 && p_high <= 1.0))
        throw UsageError("corridor: patrol probability must be in (0.5, 1]");
    const int H = horizon;
    std::vector<std::string> cols;
    for (int i = 0; i < length; ++i) cols.push_back(std::to_string(i));
    AlphabetSpec alphabet({"a0", "a1"}, {{"0", "1"}, cols, {"enemy", "clear"}}, {0.0, 1.0}, H,
                          {"_", "_", "_"});
    MachineBuilder b(alphabet, "corridor");

    SymbolId r0 = *alphabet.reward_id(0.0);
    SymbolId r1 = *alphabet.reward_id(1.0);
    auto obs = [&](SymbolId row, int col, bool enemy) {
        std::vector<SymbolId> f{row, static_cast<SymbolId>(col), enemy ? SymbolId{0} : SymbolId{1}};
        return alphabet.obs_flat(f);
    };
    // In configuration c the enemy patrols row (col + c) mod 2 of each column.
    auto enemy_row = [](int c, int col) { return (col + c) % 2; };

    int q0 = b.add_state(0);
    std::map<std::pair<int, int>, int> config_state;  // (config, layer) -> id
    for (int t = 1; t <= H - 1; ++t)
        for (int c = 0; c < 2; ++c) config_state[{c, t}] = b.add_state(t);
    int pre_terminal = b.add_state(H);
    int final_state = b.add_state(H + 1);
    b.m.initial_state = q0;

    // Step 0 reveals the current patrol pattern at the start cell.
    if (H >= 2) {
        b.emit(q0, alphabet.start_action(), obs(0, 0, true), r0, 0.5, config_state[{0, 1}]);
        b.emit(q0, alphabet.start_action(), obs(0, 0, false), r0, 0.5, config_state[{1, 1}]);
    } else {
        b.emit(q0, alphabet.start_action(), obs(0, 0, true), r0, 0.5, pre_terminal);
        b.emit(q0, alphabet.start_action(), obs(0, 0, false), r0, 0.5, pre_terminal);
    }

    for (int t = 1; t <= H - 1; ++t) {
        int col = t % length;  // column reached by step t; wraps back to 0
        bool scoring = (col == length - 1);
        for (int c = 0; c < 2; ++c) {
            int q = config_state[{c, t}];
            for (SymbolId a = 0; a < 2; ++a) {
                double pe = (a == enemy_row(c, col)) ? p_high : 1.0 - p_high;
                for (int enc = 0; enc < 2; ++enc) {
                    double p = enc ? pe : 1.0 - pe;
                    if (p <= 0.0) continue;
                    int nc = enc ? (c ^ 1) : c;
                    int next = (t + 1 <= H - 1) ? config_state[{nc, t + 1}] : pre_terminal;
                    SymbolId rew = (scoring && !enc) ? r1 : r0;
                    b.emit(q, a, obs(a, col, enc != 0), rew, p, next);
                }
            }
        }
    }
    b.finish_terminal_layers(pre_terminal, final_state);
    b.m.validate();
    return b.m;
}

BehaviorPolicy corridor_dodge_policy(const GroundTruthRdp& machine, double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw UsageError("dodge policy: eps must be in (0, 0.5)");
    const AlphabetSpec& al = machine.alphabet;
    const int A = al.num_actions();
    BehaviorPolicy p;
    p.name = "dodge";
    p.table.assign(machine.num_states(), std::vector<double>(A, 1.0 / A));
    SymbolId enemy_sym = *al.feature_id(2, "enemy");
    for (int q = 0; q < machine.num_states(); ++q) {
        int t = machine.state_layer[q];
        if (t == 0 || t > al.horizon() - 1) continue;
        // Encounter probability per action, read off the machine outputs.
        double enc0 = 0.0, enc1 = 0.0;
        for (const Emission& e : machine.outputs[q][0])
            if (al.obs_feature_of(e.obs, 2) == enemy_sym) enc0 += e.prob;
        for (const Emission& e : machine.outputs[q][1])
            if (al.obs_feature_of(e.obs, 2) == enemy_sym) enc1 += e.prob;
        if (enc0 == enc1) continue;
        int safe = enc0 < enc1 ? 0 : 1;
        p.table[q][safe] = 1.0 - eps;
        p.table[q][1 - safe] = eps;
    }
    return p;
}

GroundTruthRdp tmaze_machine(int horizon, int corridor_length) {
    const int N = corridor_length;
    if (N < 2) throw UsageError("tmaze: corridor length must be >= 2");
    const int H = horizon;
    AlphabetSpec alphabet({"North", "South", "East", "West"}, {{"011", "110", "101", "010"}},
                          {0.0, 4.0, -1.0}, H, {"_"});
    MachineBuilder b(alphabet, "tmaze");

    SymbolId r0 = *alphabet.reward_id(0.0);
    SymbolId rp = *alphabet.reward_id(4.0);
    SymbolId rn = *alphabet.reward_id(-1.0);
    SymbolId o011 = *alphabet.feature_id(0, "011");
    SymbolId o110 = *alphabet.feature_id(0, "110");
    SymbolId o101 = *alphabet.feature_id(0, "101");
    SymbolId o010 = *alphabet.feature_id(0, "010");
    SymbolId aN = 0, aS = 1, aE = 2, aW = 3;

    // th = 0: goal above the junction (initial observation 110), th = 1: below.
    auto obs_of = [&](int th, int cell) {
        if (cell == 1) return th == 0 ? o110 : o011;
        if (cell == N) return o010;
        return o101;
    };

    int q0 = b.add_state(0);
    std::map<std::tuple<int, int, int>, int> cell_state;  // (th, cell, layer)
    std::map<int, int> absorbed_state;                    // layer -> id
    for (int t = 1; t <= H - 1; ++t) {
        for (int th = 0; th < 2; ++th)
            for (int cell = 1; cell <= std::min(t, N); ++cell)
                cell_state[{th, cell, t}] = b.add_state(t);
        if (t >= N + 1) absorbed_state[t] = b.add_state(t);
    }
    int pre_terminal = b.add_state(H);
    int final_state = b.add_state(H + 1);
    b.m.initial_state = q0;

    auto next_of = [&](int th, int cell, int t) {
        return (t + 1 <= H - 1) ? cell_state[{th, cell, t + 1}] : pre_terminal;
    };
    auto next_absorbed = [&](int t) {
        return (t + 1 <= H - 1) ? absorbed_state[t + 1] : pre_terminal;
    };

    if (H >= 2) {
        b.emit(q0, alphabet.start_action(), o110, r0, 0.5, cell_state[{0, 1, 1}]);
        b.emit(q0, alphabet.start_action(), o011, r0, 0.5, cell_state[{1, 1, 1}]);
    } else {
        b.emit(q0, alphabet.start_action(), o110, r0, 0.5, pre_terminal);
        b.emit(q0, alphabet.start_action(), o011, r0, 0.5, pre_terminal);
    }

    for (int t = 1; t <= H - 1; ++t) {
        for (int th = 0; th < 2; ++th) {
            for (int cell = 1; cell <= std::min(t, N); ++cell) {
                int q = cell_state[{th, cell, t}];
                // East
                if (cell < N)
                    b.emit(q, aE, obs_of(th, cell + 1), r0, 1.0, next_of(th, cell + 1, t));
                else
                    b.emit(q, aE, o010, rn, 1.0, next_of(th, cell, t));  // wall, standing still
                // West
                if (cell > 1)
                    b.emit(q, aW, obs_of(th, cell - 1), r0, 1.0, next_of(th, cell - 1, t));
                else
                    b.emit(q, aW, obs_of(th, 1), rn, 1.0, next_of(th, 1, t));
                // North / South
                if (cell < N) {
                    b.emit(q, aN, obs_of(th, cell), rn, 1.0, next_of(th, cell, t));
                    b.emit(q, aS, obs_of(th, cell), rn, 1.0, next_of(th, cell, t));
                } else {
                    // the turn: correct side pays 4, wrong side -1, both absorb
                    b.emit(q, aN, o010, th == 0 ? rp : rn, 1.0, next_absorbed(t));
                    b.emit(q, aS, o010, th == 1 ? rp : rn, 1.0, next_absorbed(t));
                }
            }
        }
        if (auto it = absorbed_state.find(t); it != absorbed_state.end())
            for (SymbolId a = 0; a < 4; ++a) b.emit(it->second, a, o010, r0, 1.0, next_absorbed(t));
    }
    b.finish_terminal_layers(pre_terminal, final_state);
    b.m.validate();
    return b.m;
}

RdpBackedEnv::RdpBackedEnv(std::string name, GroundTruthRdp machine)
    : machine_(std::make_shared<GroundTruthRdp>(std::move(machine))) {
    name_ = std::move(name);
    alphabet_ = machine_->alphabet;
    state_ = machine_->initial_state;
}

std::unique_ptr<Environment> RdpBackedEnv::clone() const {
    auto copy = std::make_unique<RdpBackedEnv>(*this);
    copy->state_ = machine_->initial_state;
    return copy;
}

std::pair<SymbolId, SymbolId> RdpBackedEnv::emit(SymbolId action, Rng& rng) {
    const auto& ems = machine_->emissions(state_, action);
    double u = rng.uniform01();
    double acc = 0.0;
    const Emission* chosen = &ems.back();
    for (const Emission& e : ems) {
        acc += e.prob;
        if (u < acc) {
            chosen = &e;
            break;
        }
    }
    state_ = machine_->next_state(state_, action, chosen->obs);
    return {chosen->obs, chosen->reward};
}

std::pair<SymbolId, SymbolId> RdpBackedEnv::start(Rng& rng) {
    state_ = machine_->initial_state;
    return emit(alphabet_.start_action(), rng);
}

std::pair<SymbolId, SymbolId> RdpBackedEnv::step(SymbolId action, Rng& rng) {
    return emit(action, rng);
}

namespace {

// Cookie: four rooms, a button in the red room spawns a cookie in the blue or
// green room with equal probability; eating it pays 1.
class CookieEnv : public Environment {
public:
    explicit CookieEnv(int horizon) {
        name_ = "cookie";
        alphabet_ = AlphabetSpec({"left", "right", "up", "down", "press", "eat"},
                                 {{"blue", "white", "green", "red", "blue_c", "green_c"}},
                                 {0.0, 1.0}, horizon, {"_"});
    }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<CookieEnv>(*this);
    }
    std::pair<SymbolId, SymbolId> start(Rng&) override {
        room_ = Room::White;
        cookie_ = Cookie::None;
        return {obs(), *alphabet_.reward_id(0.0)};
    }
    std::pair<SymbolId, SymbolId> step(SymbolId action, Rng& rng) override {
        double reward = 0.0;
        switch (action) {
            case 0:  // left
                if (room_ == Room::White) room_ = Room::Blue;
                else if (room_ == Room::Green) room_ = Room::White;
                break;
            case 1:  // right
                if (room_ == Room::White) room_ = Room::Green;
                else if (room_ == Room::Blue) room_ = Room::White;
                break;
            case 2:  // up
                if (room_ == Room::White) room_ = Room::Red;
                break;
            case 3:  // down
                if (room_ == Room::Red) room_ = Room::White;
                break;
            case 4:  // press
                if (room_ == Room::Red) cookie_ = rng.uniform_int(2) ? Cookie::Blue : Cookie::Green;
                break;
            case 5:  // eat
                if ((room_ == Room::Blue && cookie_ == Cookie::Blue) ||
                    (room_ == Room::Green && cookie_ == Cookie::Green)) {
                    reward = 1.0;
                    cookie_ = Cookie::None;
                }
                break;
            default: throw UsageError("cookie: bad action id");
        }
        return {obs(), *alphabet_.reward_id(reward)};
    }

private:
    enum class Room { Blue, White, Green, Red };
    enum class Cookie { None, Blue, Green };
    SymbolId obs() const {
        if (room_ == Room::Blue && cookie_ == Cookie::Blue) return *alphabet_.feature_id(0, "blue_c");
        if (room_ == Room::Green && cookie_ == Cookie::Green)
            return *alphabet_.feature_id(0, "green_c");
        static const char* names[] = {"blue", "white", "green", "red"};
        return *alphabet_.feature_id(0, names[static_cast<int>(room_)]);
    }
    Room room_ = Room::White;
    Cookie cookie_ = Cookie::None;
};

// Cheese maze: 11 cells, the observation is the local wall pattern; reaching
// the cheese pays 1 and teleports the agent to a uniformly random non-goal
// cell.
class CheeseEnv : public Environment {
public:
    explicit CheeseEnv(int horizon) {
        name_ = "cheese";
        alphabet_ = AlphabetSpec({"N", "S", "E", "W"}, {{"nw", "ns", "n", "ne", "ew", "sew"}},
                                 {0.0, 1.0}, horizon, {"_"});
    }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<CheeseEnv>(*this);
    }
    std::pair<SymbolId, SymbolId> start(Rng& rng) override {
        cell_ = kNonGoal[rng.uniform_int(10)];
        return {obs(cell_), *alphabet_.reward_id(0.0)};
    }
    std::pair<SymbolId, SymbolId> step(SymbolId action, Rng& rng) override {
        int next = neighbor(cell_, action);
        if (next == kGoal) {
            cell_ = kNonGoal[rng.uniform_int(10)];
            return {obs(kGoal), *alphabet_.reward_id(1.0)};
        }
        cell_ = next;
        return {obs(cell_), *alphabet_.reward_id(0.0)};
    }

private:
    // Cells: row 0 = 0..4, row 1 = {5:(1,0), 6:(1,2), 7:(1,4)},
    // row 2 = {8:(2,0), 9:(2,2) goal, 10:(2,4)}.
    static constexpr int kGoal = 9;
    static constexpr int kNonGoal[10] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 10};

    static int neighbor(int cell, SymbolId action) {
        static const int table[11][4] = {
            // N   S   E   W
            {0, 5, 1, 0},    // 0 (0,0)
            {1, 1, 2, 0},    // 1 (0,1)
            {2, 6, 3, 1},    // 2 (0,2)
            {3, 3, 4, 2},    // 3 (0,3)
            {4, 7, 4, 3},    // 4 (0,4)
            {0, 8, 5, 5},    // 5 (1,0)
            {2, 9, 6, 6},    // 6 (1,2)
            {4, 10, 7, 7},   // 7 (1,4)
            {5, 8, 8, 8},    // 8 (2,0)
            {6, 9, 9, 9},    // 9 (2,2) goal
            {7, 10, 10, 10}  // 10 (2,4)
        };
        return table[cell][action];
    }
    SymbolId obs(int cell) const {
        static const char* pattern[11] = {"nw", "ns", "n",  "ns", "ne", "ew",
                                          "ew", "ew", "sew", "sew", "sew"};
        return *alphabet_.feature_id(0, pattern[cell]);
    }
    int cell_ = 0;
};

// Mini-hall: three rooms in a row, four orientations; walking forward into
// the star room pays 1 and resets the pose uniformly.
class MinihallEnv : public Environment {
public:
    explicit MinihallEnv(int horizon) {
        name_ = "minihall";
        alphabet_ = AlphabetSpec({"fwd", "right", "left"},
                                 {{"wN", "wS", "open", "wW", "glow", "star"}}, {0.0, 1.0},
                                 horizon, {"_"});
    }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<MinihallEnv>(*this);
    }
    std::pair<SymbolId, SymbolId> start(Rng& rng) override {
        reset_pose(rng);
        return {obs(), *alphabet_.reward_id(0.0)};
    }
    std::pair<SymbolId, SymbolId> step(SymbolId action, Rng& rng) override {
        if (action == 1) dir_ = (dir_ + 1) % 4;
        else if (action == 2) dir_ = (dir_ + 3) % 4;
        else if (action == 0) {
            if (dir_ == 1 && room_ < 2) ++room_;
            else if (dir_ == 3 && room_ > 0) --room_;
            if (room_ == 2) {  // entered the star room
                SymbolId star = *alphabet_.feature_id(0, "star");
                reset_pose(rng);
                return {star, *alphabet_.reward_id(1.0)};
            }
        }
        return {obs(), *alphabet_.reward_id(0.0)};
    }

private:
    void reset_pose(Rng& rng) {
        int v = rng.uniform_int(8);
        room_ = v / 4;
        dir_ = v % 4;
    }
    SymbolId obs() const {
        // dir: 0=N, 1=E, 2=S, 3=W
        const char* sym;
        if (dir_ == 0) sym = "wN";
        else if (dir_ == 2) sym = "wS";
        else if (dir_ == 1) sym = (room_ == 1) ? "glow" : "open";
        else sym = (room_ == 0) ? "wW" : "open";
        return *alphabet_.feature_id(0, sym);
    }
    int room_ = 0;
    int dir_ = 0;
};

}  // namespace

std::unique_ptr<Environment> make_env(const std::string& name, const EnvParams& params) {
    const int H = params.horizon;
    if (H < 1) throw UsageError("make_env: horizon must be >= 1");
    if (name == "corridor") {
        int length = static_cast<int>(params.get("length", 4));
        double p_high = params.get("p_high", 1.0);
        if (H < length)
            std::cerr << "[rdpforge] warning: corridor horizon " << H
                      << " never reaches the scoring column (length " << length << ")\n";
        return std::make_unique<RdpBackedEnv>("corridor", corridor_machine(H, length, p_high));
    }
    if (name == "tmaze") {
        int N = static_cast<int>(params.get("corridor", 3));
        if (H < N + 1)
            std::cerr << "[rdpforge] warning: tmaze horizon " << H
                      << " too short to reach the junction reward (corridor " << N << ")\n";
        return std::make_unique<RdpBackedEnv>("tmaze", tmaze_machine(H, N));
    }
    if (name == "cookie") return std::make_unique<CookieEnv>(H);
    if (name == "cheese") return std::make_unique<CheeseEnv>(H);
    if (name == "minihall") return std::make_unique<MinihallEnv>(H);
    throw UsageError("make_env: unknown environment '" + name +
                     "' (expected corridor, tmaze, cookie, cheese or minihall)");
}

const GroundTruthRdp& ground_truth_rdp(const Environment& env) {
    const GroundTruthRdp* m = env.gt_machine();
    if (!m)
        throw UnsupportedError("no ground-truth machine available for environment '" +
                               env.name() + "'");
    return *m;
}

BehaviorPolicy uniform_policy(const Environment& env) {
    return BehaviorPolicy::uniform(env.alphabet());
}

BehaviorPolicy default_behavior_policy(const Environment& env) {
    if (env.name() == "corridor") return corridor_dodge_policy(ground_truth_rdp(env), 0.2);
    if (env.name() == "tmaze")
        // North, South, East, West: drift toward the junction, keep some
        // chance of walking back to the start cell.
        return BehaviorPolicy::fixed_dist("drift", {0.25, 0.15, 0.35, 0.25});
    return uniform_policy(env);
}

Dataset generate_dataset(const Environment& env, const BehaviorPolicy& policy,
                         size_t n_episodes, uint64_t seed) {
    if (n_episodes < 1) throw UsageError("generate_dataset: need at least one episode");
    if (policy.state_backed() && !env.gt_machine())
        throw UsageError("generate_dataset: state-backed policy needs a machine-backed env");
    const AlphabetSpec& al = env.alphabet();
    const int H = al.horizon();
    SymbolId r0 = *al.reward_id(0.0);

    Dataset ds;
    ds.alphabet = al;
    ds.metadata.generator = env.name();
    ds.metadata.policy = policy.name;
    ds.metadata.seed = seed;
    ds.episodes.resize(n_episodes);

    std::unique_ptr<Environment> sim = env.clone();
    for (size_t i = 0; i < n_episodes; ++i) {
        Rng rng(derive_seed(seed, i));
        Episode& e = ds.episodes[i];
        e.steps.resize(H + 1);
        auto [o0, rw0] = sim->start(rng);
        e.steps[0] = {al.start_action(), o0, rw0};
        for (int t = 1; t <= H - 1; ++t) {
            SymbolId a = static_cast<SymbolId>(rng.sample(policy.probs(sim->gt_state())));
            auto [o, r] = sim->step(a, rng);
            e.steps[t] = {a, o, r};
        }
        SymbolId a_last = static_cast<SymbolId>(rng.sample(policy.probs(sim->gt_state())));
        e.steps[H] = {a_last, al.terminal_obs(), r0};
    }
    return ds;
}

GroundTruthRdp synthetic_machine(int horizon, int max_states_per_layer, uint64_t seed) {
    if (horizon < 2) throw UsageError("synthetic: horizon must be >= 2");
    if (max_states_per_layer < 2 || max_states_per_layer > 3)
        throw UsageError("synthetic: supports 2..3 states per layer");
    AlphabetSpec alphabet({"a", "b"}, {{"x", "y"}}, {0.0, 1.0}, horizon, {"_"});
    MachineBuilder b(alphabet, "synthetic");
    Rng rng(derive_seed(seed, 0x5157ull));

    SymbolId ox = 0, oy = 1;
    const double grid[3] = {0.05, 0.5, 0.95};  // P(x) profiles, pairwise far apart
    const int H = horizon;

    int q0 = b.add_state(0);
    std::vector<std::vector<int>> real_layers(H);  // t = 1..H-1
    real_layers[1] = {b.add_state(1), b.add_state(1)};  // layer 1 has two states (x / y split)
    for (int t = 2; t <= H - 1; ++t) {
        int size = 2 + rng.uniform_int(max_states_per_layer - 1);
        for (int s = 0; s < size; ++s) real_layers[t].push_back(b.add_state(t));
    }
    int pre_terminal = b.add_state(H);
    int final_state = b.add_state(H + 1);
    b.m.initial_state = q0;

    b.emit(q0, alphabet.start_action(), ox, 0, 0.5, real_layers[1][0]);
    b.emit(q0, alphabet.start_action(), oy, 0, 0.5, real_layers[1][1]);

    for (int t = 1; t <= H - 1; ++t) {
        const auto& layer = real_layers[t];
        const std::vector<int>* next_layer = (t + 1 <= H - 1) ? &real_layers[t + 1] : nullptr;
        // Distinct emission profile per state guarantees first-step separation.
        for (size_t s = 0; s < layer.size(); ++s) {
            int q = layer[s];
            for (SymbolId a = 0; a < 2; ++a) {
                double px = (a == 0) ? grid[s] : grid[(s + 1 + rng.uniform_int(2)) % 3];
                SymbolId rx = static_cast<SymbolId>(rng.uniform_int(2));
                SymbolId ry = static_cast<SymbolId>(rng.uniform_int(2));
                b.emit(q, a, ox, rx, px, pre_terminal);
                b.emit(q, a, oy, ry, 1.0 - px, pre_terminal);
            }
        }
        // Assign transition targets: first one per next-layer state so every
        // state stays reachable, then the remaining slots at random.
        if (next_layer) {
            std::vector<std::tuple<int, SymbolId, SymbolId>> slots;
            for (int q : layer)
                for (SymbolId a = 0; a < 2; ++a)
                    for (SymbolId o = 0; o < 2; ++o) slots.emplace_back(q, a, o);
            for (size_t i = slots.size(); i > 1; --i)
                std::swap(slots[i - 1], slots[rng.uniform_int(static_cast<int>(i))]);
            for (size_t i = 0; i < slots.size(); ++i) {
                int target = i < next_layer->size()
                                 ? (*next_layer)[i]
                                 : (*next_layer)[rng.uniform_int(
                                       static_cast<int>(next_layer->size()))];
                auto [q, a, o] = slots[i];
                b.m.transitions[GroundTruthRdp::key(q, a, o)] = target;
            }
        }
    }
    b.finish_terminal_layers(pre_terminal, final_state);
    b.m.validate();
    return b.m;
}

}  // namespace rdpforge
