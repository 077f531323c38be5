#include "rdpforge/ground_truth.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rdpforge {

int GroundTruthRdp::next_state(int q, SymbolId a, SymbolId obs) const {
    auto it = transitions.find(key(q, a, obs));
    if (it == transitions.end())
        throw UsageError("ground truth: missing transition from state " + std::to_string(q));
    return it->second;
}

int GroundTruthRdp::actions_at(int q) const {
    return state_layer[q] == 0 ? 1 : alphabet.num_actions();
}

const std::vector<Emission>& GroundTruthRdp::emissions(int q, SymbolId a) const {
    if (state_layer[q] == 0) {
        if (a != alphabet.start_action()) throw UsageError("layer 0 only takes the start action");
        return outputs[q][0];
    }
    return outputs[q][a];
}

double GroundTruthRdp::theta_o(int q, SymbolId a, SymbolId obs) const {
    double p = 0.0;
    for (const Emission& e : emissions(q, a))
        if (e.obs == obs) p += e.prob;
    return p;
}

double GroundTruthRdp::theta_r(int q, SymbolId a, SymbolId reward) const {
    double p = 0.0;
    for (const Emission& e : emissions(q, a))
        if (e.reward == reward) p += e.prob;
    return p;
}

void GroundTruthRdp::validate() const {
    const int H = alphabet.horizon();
    if (static_cast<int>(layers.size()) != H + 2)
        throw UsageError("ground truth: expected H+2 layers");
    if (layers[0].size() != 1 || layers[0][0] != initial_state)
        throw UsageError("ground truth: layer 0 must contain exactly the initial state");
    for (int t = 0; t <= H + 1; ++t)
        for (int q : layers[t])
            if (state_layer[q] != t) throw UsageError("ground truth: inconsistent layer index");
    for (int t = 0; t <= H; ++t) {
        for (int q : layers[t]) {
            const int na = actions_at(q);
            for (int ai = 0; ai < na; ++ai) {
                SymbolId a = (t == 0) ? alphabet.start_action() : static_cast<SymbolId>(ai);
                const auto& ems = outputs[q][ai];
                if (ems.empty()) throw UsageError("ground truth: state lacks emissions");
                double total = 0.0;
                for (const Emission& e : ems) {
                    total += e.prob;
                    int next = next_state(q, a, e.obs);
                    if (state_layer[next] != t + 1)
                        throw UsageError("ground truth: transition does not advance one layer");
                    if (t == H && e.obs != alphabet.terminal_obs())
                        throw UsageError("ground truth: layer H must emit the terminal observation");
                }
                if (std::abs(total - 1.0) > 1e-9)
                    throw UsageError("ground truth: emission probabilities must sum to 1");
            }
        }
    }
}

BehaviorPolicy BehaviorPolicy::uniform(const AlphabetSpec& alphabet) {
    BehaviorPolicy p;
    p.name = "uniform";
    p.fixed.assign(alphabet.num_actions(), 1.0 / alphabet.num_actions());
    return p;
}

BehaviorPolicy BehaviorPolicy::fixed_dist(std::string name, std::vector<double> action_probs) {
    double total = 0.0;
    for (double v : action_probs) {
        if (v < 0.0) throw UsageError("policy: negative probability");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw UsageError("policy: probabilities must sum to 1");
    BehaviorPolicy p;
    p.name = std::move(name);
    p.fixed = std::move(action_probs);
    return p;
}

GroundTruthRdp minimize_layered(const GroundTruthRdp& rdp) {
    const int H = rdp.alphabet.horizon();
    const int n = rdp.num_states();
    std::vector<int> cls(n, 0);  // equivalence class per state, valid layer by layer

    // Backward pass: two states are equivalent iff for every action they have
    // the same (obs, reward, prob, successor-class) emission signature.
    for (int t = H + 1; t >= 0; --t) {
        if (t == H + 1) {
            for (int q : rdp.layers[t]) cls[q] = 0;
            continue;
        }
        std::map<std::vector<std::tuple<SymbolId, SymbolId, int64_t, int>>, int> classes;
        for (int q : rdp.layers[t]) {
            std::vector<std::tuple<SymbolId, SymbolId, int64_t, int>> sig;
            const int na = rdp.actions_at(q);
            for (int ai = 0; ai < na; ++ai) {
                SymbolId a = (t == 0) ? rdp.alphabet.start_action() : static_cast<SymbolId>(ai);
                auto ems = rdp.outputs[q][ai];
                std::sort(ems.begin(), ems.end(), [](const Emission& x, const Emission& y) {
                    return std::tie(x.obs, x.reward) < std::tie(y.obs, y.reward);
                });
                for (const Emission& e : ems)
                    sig.emplace_back(e.obs, e.reward, std::llround(e.prob * 1e12),
                                     cls[rdp.next_state(q, a, e.obs)]);
                sig.emplace_back(-1, static_cast<SymbolId>(ai), 0, -1);  // action separator
            }
            auto [it, inserted] = classes.emplace(std::move(sig), static_cast<int>(classes.size()));
            cls[q] = it->second;
        }
    }

    GroundTruthRdp out;
    out.alphabet = rdp.alphabet;
    out.name = rdp.name;
    out.layers.resize(H + 2);
    std::vector<int> rep(n, -1);  // (layer,class) representative new id
    std::vector<int> new_id(n, -1);
    for (int t = 0; t <= H + 1; ++t) {
        std::map<int, int> class_to_new;
        for (int q : rdp.layers[t]) {
            auto it = class_to_new.find(cls[q]);
            if (it == class_to_new.end()) {
                int id = static_cast<int>(out.state_layer.size());
                out.state_layer.push_back(t);
                out.layers[t].push_back(id);
                out.outputs.emplace_back();
                class_to_new.emplace(cls[q], id);
                rep[id] = q;
                new_id[q] = id;
            } else {
                new_id[q] = it->second;
            }
        }
    }
    out.initial_state = new_id[rdp.initial_state];
    for (int t = 0; t <= H; ++t) {
        for (int id : out.layers[t]) {
            int q = rep[id];
            const int na = rdp.actions_at(q);
            out.outputs[id].resize(na);
            for (int ai = 0; ai < na; ++ai) {
                SymbolId a = (t == 0) ? rdp.alphabet.start_action() : static_cast<SymbolId>(ai);
                out.outputs[id][ai] = rdp.outputs[q][ai];
                for (const Emission& e : rdp.outputs[q][ai])
                    out.transitions[GroundTruthRdp::key(id, a, e.obs)] =
                        new_id[rdp.next_state(q, a, e.obs)];
            }
        }
    }
    for (int id : out.layers[H + 1]) out.outputs[id].clear();
    return out;
}

GroundTruthRdp strip_rewards(const GroundTruthRdp& rdp) {
    GroundTruthRdp out = rdp;
    for (auto& per_state : out.outputs) {
        for (auto& per_action : per_state) {
            // collapse emissions that only differed in reward
            std::map<SymbolId, double> by_obs;
            for (const Emission& e : per_action) by_obs[e.obs] += e.prob;
            per_action.clear();
            for (const auto& [obs, prob] : by_obs) per_action.push_back({obs, 0, prob});
        }
    }
    return out;
}

}  // namespace rdpforge
