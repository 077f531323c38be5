#pragma once

// Episodes, factored alphabets and trace tokenization. Symbols are interned
// to small integer ids; the human-readable strings only appear in files.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdpforge/errors.hpp"

namespace rdpforge {

using SymbolId = int32_t;

struct Token {
    enum class Category { Action, Feature, Reward };
    Category category;
    int feature_index;  // meaningful for Category::Feature only
    SymbolId symbol;
    int32_t global_id;  // unique across all categories
};

class AlphabetSpec {
public:
    AlphabetSpec() = default;
    // terminal_obs gives one symbol per feature; symbols not already present
    // in a feature domain are appended to it.
    AlphabetSpec(std::vector<std::string> actions,
                 std::vector<std::vector<std::string>> obs_features,
                 std::vector<double> rewards, int horizon,
                 std::vector<std::string> terminal_obs);

    static constexpr const char* kStartActionName = "_start";

    int num_actions() const { return static_cast<int>(actions_.size()); }
    SymbolId start_action() const { return num_actions(); }
    int num_features() const { return static_cast<int>(features_.size()); }
    int feature_size(int i) const { return static_cast<int>(features_[i].size()); }
    int num_rewards() const { return static_cast<int>(rewards_.size()); }
    int horizon() const { return horizon_; }

    // Π_i |O(i)|, the size of the product observation space.
    int num_obs() const { return obs_product_; }
    SymbolId terminal_obs() const { return terminal_obs_flat_; }

    const std::vector<std::string>& actions() const { return actions_; }
    const std::vector<std::vector<std::string>>& obs_features() const { return features_; }
    const std::vector<double>& rewards() const { return rewards_; }
    const std::vector<std::string>& terminal_obs_symbols() const { return terminal_symbols_; }

    const std::string& action_name(SymbolId a) const;
    const std::string& feature_name(int feature, SymbolId s) const { return features_[feature][s]; }
    double reward_value(SymbolId r) const { return rewards_[r]; }

    std::optional<SymbolId> action_id(const std::string& name) const;
    std::optional<SymbolId> feature_id(int feature, const std::string& name) const;
    std::optional<SymbolId> reward_id(double value) const;

    // flat obs index <-> per-feature symbols
    SymbolId obs_flat(std::span<const SymbolId> per_feature) const;
    SymbolId obs_feature_of(SymbolId flat, int feature) const;
    std::vector<SymbolId> obs_unpack(SymbolId flat) const;

    // token ids: actions (incl. the start marker), then每 feature domain, then rewards
    int tokens_per_step() const { return num_features() + 2; }
    int num_token_ids() const { return token_reward_base_ + num_rewards(); }
    int32_t action_token(SymbolId a) const { return a; }
    int32_t feature_token(int feature, SymbolId s) const { return token_feature_base_[feature] + s; }
    int32_t reward_token(SymbolId r) const { return token_reward_base_ + r; }
    Token token_of(int32_t global_id) const;

    // packed step symbol (a, o, r) -> int32; excludes nothing, start action allowed
    int32_t step_sym(SymbolId a, SymbolId obs, SymbolId r) const;
    void step_unpack(int32_t sym, SymbolId& a, SymbolId& obs, SymbolId& r) const;

    bool operator==(const AlphabetSpec& other) const;

private:
    std::vector<std::string> actions_;
    std::vector<std::vector<std::string>> features_;
    std::vector<double> rewards_;
    int horizon_ = 1;
    std::vector<std::string> terminal_symbols_;

    int obs_product_ = 0;
    SymbolId terminal_obs_flat_ = 0;
    std::vector<int> obs_stride_;
    std::vector<int32_t> token_feature_base_;
    int32_t token_reward_base_ = 0;
};

struct Step {
    SymbolId action = 0;
    SymbolId obs = 0;  // flat product index
    SymbolId reward = 0;
    bool operator==(const Step&) const = default;
};

struct Episode {
    std::vector<Step> steps;  // exactly H+1 entries
    bool operator==(const Episode&) const = default;
};

struct DatasetMetadata {
    std::string generator;
    std::string policy;
    uint64_t seed = 0;
    bool operator==(const DatasetMetadata&) const = default;
};

struct Dataset {
    AlphabetSpec alphabet;
    std::vector<Episode> episodes;
    DatasetMetadata metadata;

    // Validates every episode against the alphabet; throws UsageError with the
    // offending episode index in the message.
    void validate() const;
    uint64_t fingerprint() const;
};

// Flattens steps [from_t, to_t] as [Action][Feature 1]..[Feature m][Reward].
std::vector<Token> tokenize(const AlphabetSpec& alphabet, const Episode& episode,
                            int from_t, int to_t);

// Same flattening, but raw global token ids (the hot path for matching).
void tokenize_ids(const AlphabetSpec& alphabet, const Episode& episode, int from_t,
                  int to_t, std::vector<int32_t>& out);

// Steps t..H of the episode.
std::vector<Step> suffix_of(const AlphabetSpec& alphabet, const Episode& episode, int t);

}  // namespace rdpforge
