#include "rdpforge/lang.hpp"

#include <algorithm>
#include <unordered_map>

#include "rdpforge/rng.hpp"

namespace rdpforge {

namespace {

uint64_t mix(uint64_t h, uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

uint64_t atom_hash(const StepAtom& atom) {
    uint64_t h = 0xa70a;
    for (int32_t s : atom.slots) h = mix(h, static_cast<uint64_t>(s) + 2);
    return h;
}

uint64_t pair_hash(uint64_t tag, const LangNode& a, const LangNode& b) {
    return mix(mix(tag, a.hash), b.hash);
}

}  // namespace

LangPtr make_atom(StepAtom atom, int tokens_per_step) {
    if (static_cast<int>(atom.slots.size()) != tokens_per_step)
        throw UsageError("atom: wrong slot count");
    auto n = std::make_shared<LangNode>();
    n->kind = LangNode::Kind::Atom;
    n->token_len = tokens_per_step;
    n->hash = atom_hash(atom);
    n->atom = std::move(atom);
    return n;
}

LangPtr make_union(LangPtr a, LangPtr b) {
    if (a->token_len != b->token_len) throw UsageError("union: mismatched token lengths");
    if (lang_equal(*a, *b)) return a;  // L ∪ L = L
    if (b->hash < a->hash) std::swap(a, b);
    auto n = std::make_shared<LangNode>();
    n->kind = LangNode::Kind::Union;
    n->token_len = a->token_len;
    n->hash = pair_hash(0x756e, *a, *b);
    n->left = std::move(a);
    n->right = std::move(b);
    return n;
}

LangPtr make_inter(LangPtr a, LangPtr b) {
    if (a->token_len != b->token_len) throw UsageError("intersection: mismatched token lengths");
    if (lang_equal(*a, *b)) return a;  // L ∩ L = L
    if (b->hash < a->hash) std::swap(a, b);
    auto n = std::make_shared<LangNode>();
    n->kind = LangNode::Kind::Inter;
    n->token_len = a->token_len;
    n->hash = pair_hash(0x696e, *a, *b);
    n->left = std::move(a);
    n->right = std::move(b);
    return n;
}

LangPtr make_concat(std::vector<LangPtr> elems, std::vector<bool> gaps, int ell_tokens) {
    if (elems.empty()) throw UsageError("concat: need at least one element");
    if (gaps.size() != elems.size() + 1) throw UsageError("concat: need k+1 separators");
    if (ell_tokens < 0) throw UsageError("concat: negative length");
    auto n = std::make_shared<LangNode>();
    n->kind = LangNode::Kind::Concat;
    n->token_len = ell_tokens;
    uint64_t h = mix(0xc0ca, static_cast<uint64_t>(ell_tokens));
    for (size_t i = 0; i < elems.size(); ++i) {
        h = mix(h, gaps[i] ? 0x2a : 0x11);
        h = mix(h, elems[i]->hash);
    }
    h = mix(h, gaps.back() ? 0x2a : 0x11);
    n->hash = h;
    n->pattern.elems = std::move(elems);
    n->pattern.gaps = std::move(gaps);
    n->pattern.ell_tokens = ell_tokens;
    return n;
}

bool lang_equal(const LangNode& a, const LangNode& b) {
    if (a.hash != b.hash || a.kind != b.kind || a.token_len != b.token_len) return false;
    switch (a.kind) {
        case LangNode::Kind::Atom:
            return a.atom == b.atom;
        case LangNode::Kind::Union:
        case LangNode::Kind::Inter:
            return lang_equal(*a.left, *b.left) && lang_equal(*a.right, *b.right);
        case LangNode::Kind::Concat: {
            const Pattern& p = a.pattern;
            const Pattern& q = b.pattern;
            if (p.gaps != q.gaps || p.elems.size() != q.elems.size()) return false;
            for (size_t i = 0; i < p.elems.size(); ++i)
                if (!lang_equal(*p.elems[i], *q.elems[i])) return false;
            return true;
        }
    }
    return false;
}

namespace {

bool eval_window(const LangNode& node, std::span<const int32_t> tokens);

// Forward reachability over positions in the token string.
bool eval_concat(const Pattern& pat, std::span<const int32_t> tokens) {
    const int ell = static_cast<int>(tokens.size());
    std::vector<char> reach(ell + 1, 0), next(ell + 1, 0);
    reach[0] = 1;
    auto apply_gap = [&](std::vector<char>& r) {
        char seen = 0;
        for (int p = 0; p <= ell; ++p) {
            if (r[p]) seen = 1;
            if (seen) r[p] = 1;
        }
    };
    if (pat.gaps[0]) apply_gap(reach);
    for (size_t e = 0; e < pat.elems.size(); ++e) {
        const LangNode& elem = *pat.elems[e];
        const int len = elem.token_len;
        std::fill(next.begin(), next.end(), 0);
        bool any = false;
        for (int p = 0; p + len <= ell; ++p) {
            if (!reach[p]) continue;
            if (eval_window(elem, tokens.subspan(p, len))) {
                next[p + len] = 1;
                any = true;
            }
        }
        if (!any) return false;
        reach.swap(next);
        if (pat.gaps[e + 1]) apply_gap(reach);
    }
    return reach[ell] != 0;
}

bool eval_window(const LangNode& node, std::span<const int32_t> tokens) {
    switch (node.kind) {
        case LangNode::Kind::Atom: {
            const auto& slots = node.atom.slots;
            for (size_t i = 0; i < slots.size(); ++i)
                if (slots[i] >= 0 && slots[i] != tokens[i]) return false;
            return true;
        }
        case LangNode::Kind::Union:
            return eval_window(*node.left, tokens) || eval_window(*node.right, tokens);
        case LangNode::Kind::Inter:
            return eval_window(*node.left, tokens) && eval_window(*node.right, tokens);
        case LangNode::Kind::Concat:
            return eval_concat(node.pattern, tokens);
    }
    return false;
}

}  // namespace

bool contains(const LangNode& lang, std::span<const int32_t> tokens) {
    if (static_cast<int>(tokens.size()) != lang.token_len)
        throw UsageError("contains: token string length does not match the language length");
    return eval_window(lang, tokens);
}

double estimate_prob(const LangNode& lang, std::span<const std::vector<int32_t>> suffixes) {
    if (suffixes.empty()) throw UndefinedError("estimate_prob: empty multiset");
    uint64_t hits = 0;
    for (const auto& s : suffixes)
        if (contains(lang, s)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(suffixes.size());
}

double estimate_prob(const LangNode& lang,
                     std::span<const std::pair<std::vector<int32_t>, uint64_t>> weighted) {
    uint64_t hits = 0, n = 0;
    for (const auto& [trace, count] : weighted) {
        n += count;
        if (contains(lang, trace)) hits += count;
    }
    if (n == 0) throw UndefinedError("estimate_prob: empty multiset");
    return static_cast<double>(hits) / static_cast<double>(n);
}

namespace {

// Dedup helper keyed on canonical hashes with structural confirmation.
class Dedup {
public:
    explicit Dedup(size_t cap) : cap_(cap) {}

    bool insert(const LangPtr& node, std::vector<LangPtr>& out, const char* what) {
        auto range = seen_.equal_range(node->hash);
        for (auto it = range.first; it != range.second; ++it)
            if (lang_equal(*it->second, *node)) return false;
        if (out.size() + 1 > cap_)
            throw LimitError(std::string("family size cap exceeded while building ") + what);
        seen_.emplace(node->hash, node);
        out.push_back(node);
        return true;
    }

private:
    size_t cap_;
    std::unordered_multimap<uint64_t, LangPtr> seen_;
};

}  // namespace

std::vector<LangPtr> base_patterns(const AlphabetSpec& alphabet) {
    const int tps = alphabet.tokens_per_step();
    std::vector<LangPtr> out;
    StepAtom blank;
    blank.slots.assign(tps, -1);
    for (SymbolId a = 0; a < alphabet.num_actions(); ++a) {
        StepAtom atom = blank;
        atom.slots[0] = alphabet.action_token(a);
        out.push_back(make_atom(std::move(atom), tps));
    }
    for (SymbolId r = 0; r < alphabet.num_rewards(); ++r) {
        StepAtom atom = blank;
        atom.slots[tps - 1] = alphabet.reward_token(r);
        out.push_back(make_atom(std::move(atom), tps));
    }
    for (int i = 0; i < alphabet.num_features(); ++i) {
        for (SymbolId s = 0; s < alphabet.feature_size(i); ++s) {
            StepAtom atom = blank;
            atom.slots[1 + i] = alphabet.feature_token(i, s);
            out.push_back(make_atom(std::move(atom), tps));
        }
    }
    return out;
}

std::vector<LangPtr> boolean_close(const std::vector<LangPtr>& family, size_t cap) {
    std::vector<LangPtr> out;
    Dedup dedup(cap);
    for (const auto& l : family) dedup.insert(l, out, "B(X)");
    const size_t n = family.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i; j < n; ++j) {
            dedup.insert(make_union(family[i], family[j]), out, "B(X)");
            dedup.insert(make_inter(family[i], family[j]), out, "B(X)");
        }
    }
    return out;
}

std::vector<LangPtr> concat_family(const std::vector<LangPtr>& base, int k, int ell_tokens,
                                   size_t cap) {
    if (k < 1) throw UsageError("concat_family: k must be >= 1");
    if (ell_tokens < 0) throw UsageError("concat_family: negative token length");
    std::vector<LangPtr> out;
    Dedup dedup(cap);
    std::vector<LangPtr> elems(k);
    std::vector<bool> gaps(k + 1);
    // Iterate all |base|^k element choices and 2^(k+1) separator choices.
    std::vector<size_t> choice(k, 0);
    while (true) {
        for (int i = 0; i < k; ++i) elems[i] = base[choice[i]];
        for (uint32_t mask = 0; mask < (1u << (k + 1)); ++mask) {
            for (int i = 0; i <= k; ++i) gaps[i] = (mask >> i) & 1;
            dedup.insert(make_concat(elems, gaps, ell_tokens), out, "C_k");
        }
        int pos = k - 1;
        while (pos >= 0 && ++choice[pos] == base.size()) choice[pos--] = 0;
        if (pos < 0) break;
    }
    return out;
}

LanguageFamily build_family(const AlphabetSpec& alphabet, int i, int j, int k, int ell_tokens,
                            size_t cap) {
    const int m = alphabet.num_features();
    if (i < 1 || i > m + 2) throw UsageError("build_family: i out of range [1, m+2]");
    if (j < 1) throw UsageError("build_family: j must be >= 1");
    if (k < 1) throw UsageError("build_family: k must be >= 1");

    std::vector<LangPtr> g = base_patterns(alphabet);
    for (int level = 2; level <= i; ++level) g = boolean_close(g, cap);

    std::vector<LangPtr> langs;
    Dedup dedup(cap);
    for (int jj = 1; jj <= j; ++jj)
        for (const auto& l : concat_family(g, jj, ell_tokens, cap)) dedup.insert(l, langs, "X");
    for (int kk = 2; kk <= k; ++kk) langs = boolean_close(langs, cap);

    LanguageFamily fam;
    fam.langs = std::move(langs);
    fam.i = i;
    fam.j = j;
    fam.k = k;
    fam.ell_tokens = ell_tokens;
    return fam;
}

std::vector<uint64_t> member_counts(const LanguageFamily& family,
                                    std::span<const std::vector<int32_t>> suffixes) {
    std::vector<uint64_t> counts(family.size(), 0);
    for (const auto& s : suffixes)
        for (size_t x = 0; x < family.size(); ++x)
            if (contains(*family.langs[x], s)) ++counts[x];
    return counts;
}

std::string lang_to_string(const AlphabetSpec& alphabet, const LangNode& node) {
    switch (node.kind) {
        case LangNode::Kind::Atom: {
            std::string s = "[";
            for (size_t i = 0; i < node.atom.slots.size(); ++i) {
                if (i) s += "|";
                int32_t v = node.atom.slots[i];
                if (v < 0) {
                    s += "·";
                } else {
                    Token t = alphabet.token_of(v);
                    switch (t.category) {
                        case Token::Category::Action: s += alphabet.action_name(t.symbol); break;
                        case Token::Category::Feature:
                            s += alphabet.feature_name(t.feature_index, t.symbol);
                            break;
                        case Token::Category::Reward:
                            s += std::to_string(alphabet.reward_value(t.symbol));
                            break;
                    }
                }
            }
            return s + "]";
        }
        case LangNode::Kind::Union:
            return "(" + lang_to_string(alphabet, *node.left) + " ∪ " +
                   lang_to_string(alphabet, *node.right) + ")";
        case LangNode::Kind::Inter:
            return "(" + lang_to_string(alphabet, *node.left) + " ∩ " +
                   lang_to_string(alphabet, *node.right) + ")";
        case LangNode::Kind::Concat: {
            const Pattern& p = node.pattern;
            std::string s = "{ℓ=" + std::to_string(p.ell_tokens) + ": ";
            for (size_t i = 0; i < p.elems.size(); ++i) {
                if (p.gaps[i]) s += "* ";
                s += lang_to_string(alphabet, *p.elems[i]);
                s += " ";
            }
            if (p.gaps.back()) s += "*";
            return s + "}";
        }
    }
    return "?";
}

}  // namespace rdpforge
