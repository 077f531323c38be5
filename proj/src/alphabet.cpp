#include "rdpforge/alphabet.hpp"

#include <algorithm>
#include <unordered_set>

#include "rdpforge/rng.hpp"

namespace rdpforge {

namespace {

void check_unique(const std::vector<std::string>& symbols, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& s : symbols) {
        if (s.empty()) throw UsageError(std::string(what) + ": empty symbol");
        if (!seen.insert(s).second)
            throw UsageError(std::string(what) + ": duplicate symbol '" + s + "'");
    }
}

}  // namespace

AlphabetSpec::AlphabetSpec(std::vector<std::string> actions,
                           std::vector<std::vector<std::string>> obs_features,
                           std::vector<double> rewards, int horizon,
                           std::vector<std::string> terminal_obs)
    : actions_(std::move(actions)),
      features_(std::move(obs_features)),
      rewards_(std::move(rewards)),
      horizon_(horizon),
      terminal_symbols_(std::move(terminal_obs)) {
    if (horizon_ < 1) throw UsageError("alphabet: horizon must be >= 1");
    if (actions_.size() < 2) throw UsageError("alphabet: need at least two actions");
    if (features_.empty()) throw UsageError("alphabet: need at least one observation feature");
    if (rewards_.empty()) throw UsageError("alphabet: need at least one reward value");
    if (terminal_symbols_.size() != features_.size())
        throw UsageError("alphabet: terminal_obs must name one symbol per feature");

    check_unique(actions_, "actions");
    for (const auto& a : actions_)
        if (a == kStartActionName)
            throw UsageError("alphabet: action name collides with the start marker");
    for (size_t i = 0; i < features_.size(); ++i) {
        auto& dom = features_[i];
        if (std::find(dom.begin(), dom.end(), terminal_symbols_[i]) == dom.end())
            dom.push_back(terminal_symbols_[i]);
        check_unique(dom, "observation feature");
    }
    {
        std::unordered_set<double> seen;
        for (double r : rewards_)
            if (!seen.insert(r).second) throw UsageError("alphabet: duplicate reward value");
    }

    obs_stride_.resize(features_.size());
    int stride = 1;
    for (int i = num_features() - 1; i >= 0; --i) {
        obs_stride_[i] = stride;
        stride *= feature_size(i);
    }
    obs_product_ = stride;
    if (obs_product_ < 2) throw UsageError("alphabet: observation space must have size >= 2");

    std::vector<SymbolId> term(features_.size());
    for (int i = 0; i < num_features(); ++i) {
        auto id = feature_id(i, terminal_symbols_[i]);
        term[i] = *id;
    }
    terminal_obs_flat_ = obs_flat(term);

    token_feature_base_.resize(features_.size());
    int32_t base = num_actions() + 1;  // actions plus the start marker
    for (int i = 0; i < num_features(); ++i) {
        token_feature_base_[i] = base;
        base += feature_size(i);
    }
    token_reward_base_ = base;
}

const std::string& AlphabetSpec::action_name(SymbolId a) const {
    static const std::string start = kStartActionName;
    if (a == start_action()) return start;
    return actions_[a];
}

std::optional<SymbolId> AlphabetSpec::action_id(const std::string& name) const {
    if (name == kStartActionName) return start_action();
    for (size_t i = 0; i < actions_.size(); ++i)
        if (actions_[i] == name) return static_cast<SymbolId>(i);
    return std::nullopt;
}

std::optional<SymbolId> AlphabetSpec::feature_id(int feature, const std::string& name) const {
    const auto& dom = features_[feature];
    for (size_t i = 0; i < dom.size(); ++i)
        if (dom[i] == name) return static_cast<SymbolId>(i);
    return std::nullopt;
}

std::optional<SymbolId> AlphabetSpec::reward_id(double value) const {
    for (size_t i = 0; i < rewards_.size(); ++i)
        if (rewards_[i] == value) return static_cast<SymbolId>(i);
    return std::nullopt;
}

SymbolId AlphabetSpec::obs_flat(std::span<const SymbolId> per_feature) const {
    if (static_cast<int>(per_feature.size()) != num_features())
        throw UsageError("obs_flat: wrong number of features");
    int flat = 0;
    for (int i = 0; i < num_features(); ++i) {
        if (per_feature[i] < 0 || per_feature[i] >= feature_size(i))
            throw UsageError("obs_flat: feature symbol out of range");
        flat += per_feature[i] * obs_stride_[i];
    }
    return flat;
}

SymbolId AlphabetSpec::obs_feature_of(SymbolId flat, int feature) const {
    return (flat / obs_stride_[feature]) % feature_size(feature);
}

std::vector<SymbolId> AlphabetSpec::obs_unpack(SymbolId flat) const {
    std::vector<SymbolId> out(num_features());
    for (int i = 0; i < num_features(); ++i) out[i] = obs_feature_of(flat, i);
    return out;
}

Token AlphabetSpec::token_of(int32_t global_id) const {
    Token t;
    t.global_id = global_id;
    if (global_id < num_actions() + 1) {
        t.category = Token::Category::Action;
        t.feature_index = -1;
        t.symbol = global_id;
        return t;
    }
    for (int i = 0; i < num_features(); ++i) {
        int32_t base = token_feature_base_[i];
        if (global_id < base + feature_size(i)) {
            t.category = Token::Category::Feature;
            t.feature_index = i;
            t.symbol = global_id - base;
            return t;
        }
    }
    t.category = Token::Category::Reward;
    t.feature_index = -1;
    t.symbol = global_id - token_reward_base_;
    if (t.symbol < 0 || t.symbol >= num_rewards())
        throw UsageError("token_of: global id out of range");
    return t;
}

int32_t AlphabetSpec::step_sym(SymbolId a, SymbolId obs, SymbolId r) const {
    return (a * obs_product_ + obs) * num_rewards() + r;
}

void AlphabetSpec::step_unpack(int32_t sym, SymbolId& a, SymbolId& obs, SymbolId& r) const {
    r = sym % num_rewards();
    sym /= num_rewards();
    obs = sym % obs_product_;
    a = sym / obs_product_;
}

bool AlphabetSpec::operator==(const AlphabetSpec& other) const {
    return actions_ == other.actions_ && features_ == other.features_ &&
           rewards_ == other.rewards_ && horizon_ == other.horizon_ &&
           terminal_symbols_ == other.terminal_symbols_;
}

void Dataset::validate() const {
    const int H = alphabet.horizon();
    for (size_t e = 0; e < episodes.size(); ++e) {
        const auto& steps = episodes[e].steps;
        auto fail = [&](const std::string& why) {
            throw UsageError("episode " + std::to_string(e) + ": " + why);
        };
        if (static_cast<int>(steps.size()) != H + 1)
            fail("length " + std::to_string(steps.size()) + ", expected " + std::to_string(H + 1));
        for (size_t t = 0; t < steps.size(); ++t) {
            const Step& s = steps[t];
            if (s.action < 0 || s.action > alphabet.start_action()) fail("action id out of range");
            if (s.obs < 0 || s.obs >= alphabet.num_obs()) fail("observation id out of range");
            if (s.reward < 0 || s.reward >= alphabet.num_rewards()) fail("reward id out of range");
        }
        if (steps[0].action != alphabet.start_action()) fail("step 0 must use the start action");
        if (steps[H].obs != alphabet.terminal_obs()) fail("final step must observe the terminal symbol");
    }
}

uint64_t Dataset::fingerprint() const {
    uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](uint64_t v) { h = splitmix64(h ^ v); };
    mix(episodes.size());
    mix(static_cast<uint64_t>(alphabet.horizon()));
    for (const auto& e : episodes)
        for (const auto& s : e.steps)
            mix((static_cast<uint64_t>(s.action) << 42) ^ (static_cast<uint64_t>(s.obs) << 16) ^
                static_cast<uint64_t>(s.reward));
    return h;
}

std::vector<Token> tokenize(const AlphabetSpec& alphabet, const Episode& episode,
                            int from_t, int to_t) {
    std::vector<int32_t> ids;
    tokenize_ids(alphabet, episode, from_t, to_t, ids);
    std::vector<Token> out;
    out.reserve(ids.size());
    for (int32_t id : ids) out.push_back(alphabet.token_of(id));
    return out;
}

void tokenize_ids(const AlphabetSpec& alphabet, const Episode& episode, int from_t,
                  int to_t, std::vector<int32_t>& out) {
    const int H = static_cast<int>(episode.steps.size()) - 1;
    if (from_t < 0 || from_t > to_t || to_t > H)
        throw UsageError("tokenize: step range out of bounds");
    out.clear();
    out.reserve(static_cast<size_t>(to_t - from_t + 1) * alphabet.tokens_per_step());
    for (int t = from_t; t <= to_t; ++t) {
        const Step& s = episode.steps[t];
        out.push_back(alphabet.action_token(s.action));
        for (int i = 0; i < alphabet.num_features(); ++i)
            out.push_back(alphabet.feature_token(i, alphabet.obs_feature_of(s.obs, i)));
        out.push_back(alphabet.reward_token(s.reward));
    }
}

std::vector<Step> suffix_of(const AlphabetSpec& alphabet, const Episode& episode, int t) {
    const int H = alphabet.horizon();
    if (t < 0 || t > H) throw UsageError("suffix_of: t out of bounds");
    return std::vector<Step>(episode.steps.begin() + t, episode.steps.end());
}

}  // namespace rdpforge
