#pragma once

// Step patterns, the operators that combine them (bounded concatenation with
// gaps, pairwise unions and intersections), the X_{i,j,k} family hierarchy,
// and membership evaluation over token strings.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rdpforge/alphabet.hpp"

namespace rdpforge {

// Matches exactly one step: each of the m+2 token slots is either a required
// global token id or -1 (any symbol of that slot's category).
struct StepAtom {
    std::vector<int32_t> slots;
    bool operator==(const StepAtom&) const = default;
};

struct LangNode;
using LangPtr = std::shared_ptr<const LangNode>;

// S1 G1 S2 G2 ... Sk Gk S(k+1) intersected with Γ^ell. gap[i] selects Γ*
// for separator i, otherwise the empty string.
struct Pattern {
    std::vector<LangPtr> elems;
    std::vector<bool> gaps;  // size elems.size() + 1
    int ell_tokens = 0;
};

struct LangNode {
    enum class Kind { Atom, Union, Inter, Concat };
    Kind kind;
    StepAtom atom;         // Atom
    LangPtr left, right;   // Union / Inter, canonically ordered by hash
    Pattern pattern;       // Concat
    int token_len = 0;     // the denotation is a subset of Γ^token_len
    uint64_t hash = 0;
};

LangPtr make_atom(StepAtom atom, int tokens_per_step);
LangPtr make_union(LangPtr a, LangPtr b);
LangPtr make_inter(LangPtr a, LangPtr b);
LangPtr make_concat(std::vector<LangPtr> elems, std::vector<bool> gaps, int ell_tokens);

bool lang_equal(const LangNode& a, const LangNode& b);
std::string lang_to_string(const AlphabetSpec& alphabet, const LangNode& node);

// True iff the token string belongs to the denoted language. The string
// length must equal the node's token_len.
bool contains(const LangNode& lang, std::span<const int32_t> tokens);

// Fraction of the multiset inside the language.
double estimate_prob(const LangNode& lang, std::span<const std::vector<int32_t>> suffixes);
double estimate_prob(const LangNode& lang,
                     std::span<const std::pair<std::vector<int32_t>, uint64_t>> weighted);

struct LanguageFamily {
    std::vector<LangPtr> langs;
    int i = 1, j = 1, k = 1;
    int ell_tokens = 0;
    size_t size() const { return langs.size(); }
};

// G_1: one atom per action, per reward value, and per single feature symbol.
std::vector<LangPtr> base_patterns(const AlphabetSpec& alphabet);

// X ∪ B(X): adds all pairwise unions and intersections, structurally deduped.
std::vector<LangPtr> boolean_close(const std::vector<LangPtr>& family, size_t cap);

// C_k^ell: every ordered choice of k base languages with gap-or-empty
// separators, restricted to strings of ell tokens.
std::vector<LangPtr> concat_family(const std::vector<LangPtr>& base, int k, int ell_tokens,
                                   size_t cap);

// The three-dimensional hierarchy X_{i,j,k} at token length ell.
LanguageFamily build_family(const AlphabetSpec& alphabet, int i, int j, int k, int ell_tokens,
                            size_t cap = 1000000);

// Per-language membership counts for a batch of suffixes (learner hot path).
std::vector<uint64_t> member_counts(const LanguageFamily& family,
                                    std::span<const std::vector<int32_t>> suffixes);

}  // namespace rdpforge
