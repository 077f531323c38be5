#include "rdpforge/metrics.hpp"

#include <cmath>
#include <cstring>

namespace rdpforge {

const char* tester_kind_name(TesterKind kind) {
    switch (kind) {
        case TesterKind::PrefixExact: return "prefix";
        case TesterKind::PrefixCms: return "cms";
        case TesterKind::Language: return "lang";
    }
    return "?";
}

TesterKind tester_kind_from(const std::string& name) {
    if (name == "prefix") return TesterKind::PrefixExact;
    if (name == "cms") return TesterKind::PrefixCms;
    if (name == "lang") return TesterKind::Language;
    throw UsageError("unknown tester kind '" + name + "' (expected prefix, cms or lang)");
}

void ExactStore::add(const std::vector<int32_t>& trace, uint64_t count) {
    if (static_cast<int>(trace.size()) != suffix_steps)
        throw UsageError("exact store: trace has wrong number of steps");
    counts[trace] += count;
    size_n += count;
}

void ExactStore::merge(const ExactStore& other) {
    if (suffix_steps != other.suffix_steps)
        throw UsageError("exact store merge: different suffix lengths");
    for (const auto& [trace, c] : other.counts) counts[trace] += c;
    size_n += other.size_n;
}

namespace {

// Depth-tagged canonical byte key of a step-symbol prefix.
void encode_prefix(std::span<const int32_t> prefix, std::vector<uint8_t>& out) {
    out.clear();
    out.push_back(static_cast<uint8_t>(prefix.size()));
    for (int32_t sym : prefix) {
        out.push_back(static_cast<uint8_t>(sym & 0xff));
        out.push_back(static_cast<uint8_t>((sym >> 8) & 0xff));
        out.push_back(static_cast<uint8_t>((sym >> 16) & 0xff));
        out.push_back(static_cast<uint8_t>((sym >> 24) & 0xff));
    }
}

}  // namespace

SketchedStore SketchedStore::make(int suffix_steps, double delta_c, double epsilon,
                                  uint64_t seed) {
    SketchedStore s;
    s.suffix_steps = suffix_steps;
    s.seed = seed;
    s.per_depth.reserve(suffix_steps);
    for (int u = 1; u <= suffix_steps; ++u) s.per_depth.emplace_back(delta_c, epsilon, seed);
    return s;
}

void SketchedStore::add(std::span<const int32_t> trace, uint64_t count) {
    if (static_cast<int>(trace.size()) != suffix_steps)
        throw UsageError("sketched store: trace has wrong number of steps");
    std::vector<uint8_t> key;
    for (int u = 1; u <= suffix_steps; ++u) {
        encode_prefix(trace.subspan(0, u), key);
        per_depth[u - 1].update(key, count);
    }
    size_n += count;
}

void SketchedStore::merge(const SketchedStore& other) {
    if (suffix_steps != other.suffix_steps || seed != other.seed)
        throw IncompatibleError("sketched store merge: incompatible stores");
    for (int u = 0; u < suffix_steps; ++u) per_depth[u].merge(other.per_depth[u]);
    size_n += other.size_n;
}

uint64_t SketchedStore::query_prefix(std::span<const int32_t> prefix) const {
    if (prefix.empty()) return size_n;
    if (static_cast<int>(prefix.size()) > suffix_steps)
        throw UsageError("sketched store: prefix longer than stored suffixes");
    std::vector<uint8_t> key;
    encode_prefix(prefix, key);
    return per_depth[prefix.size() - 1].query(key);
}

double prefix_linf(const ExactStore& z1, const ExactStore& z2) {
    if (z1.size_n == 0 || z2.size_n == 0)
        throw UndefinedError("prefix distance undefined for an empty multiset");
    if (z1.suffix_steps != z2.suffix_steps)
        throw UsageError("prefix distance: different suffix lengths");
    const double n1 = static_cast<double>(z1.size_n);
    const double n2 = static_cast<double>(z2.size_n);
    double best = 0.0;
    // One pass per prefix depth; prefixes absent from both multisets differ by 0.
    for (int u = 1; u <= z1.suffix_steps; ++u) {
        std::map<std::vector<int32_t>, std::pair<uint64_t, uint64_t>> counts;
        for (const auto& [trace, c] : z1.counts) {
            std::vector<int32_t> p(trace.begin(), trace.begin() + u);
            counts[std::move(p)].first += c;
        }
        for (const auto& [trace, c] : z2.counts) {
            std::vector<int32_t> p(trace.begin(), trace.begin() + u);
            counts[std::move(p)].second += c;
        }
        for (const auto& [_, pair] : counts) {
            double d = std::abs(static_cast<double>(pair.first) / n1 -
                                static_cast<double>(pair.second) / n2);
            best = std::max(best, d);
        }
    }
    return best;
}

double prefix_linf_cms(const AlphabetSpec& alphabet, const SketchedStore& s1,
                       const SketchedStore& s2, int depth_cap) {
    if (s1.size_n == 0 || s2.size_n == 0)
        throw UndefinedError("prefix distance undefined for an empty store");
    if (s1.suffix_steps != s2.suffix_steps || s1.seed != s2.seed)
        throw IncompatibleError("prefix_linf_cms: incompatible stores");
    const int max_depth =
        depth_cap < 0 ? s1.suffix_steps : std::min(depth_cap, s1.suffix_steps);
    const double n1 = static_cast<double>(s1.size_n);
    const double n2 = static_cast<double>(s2.size_n);
    const int A = alphabet.num_actions();
    const int O = alphabet.num_obs();
    const int R = alphabet.num_rewards();

    double best = 0.0;
    std::vector<int32_t> prefix;
    // Depth-first walk over the full syntactic prefix space.
    auto walk = [&](auto&& self, int depth) -> void {
        if (depth > 0) {
            double d = std::abs(static_cast<double>(s1.query_prefix(prefix)) / n1 -
                                static_cast<double>(s2.query_prefix(prefix)) / n2);
            best = std::max(best, d);
        }
        if (depth == max_depth) return;
        for (SymbolId a = 0; a < A; ++a) {
            for (SymbolId o = 0; o < O; ++o) {
                for (SymbolId r = 0; r < R; ++r) {
                    prefix.push_back(alphabet.step_sym(a, o, r));
                    self(self, depth + 1);
                    prefix.pop_back();
                }
            }
        }
    };
    walk(walk, 0);
    return best;
}

void expand_step_trace(const AlphabetSpec& alphabet, std::span<const int32_t> step_trace,
                       std::vector<int32_t>& tokens) {
    tokens.clear();
    tokens.reserve(step_trace.size() * alphabet.tokens_per_step());
    SymbolId a, obs, r;
    for (int32_t sym : step_trace) {
        alphabet.step_unpack(sym, a, obs, r);
        tokens.push_back(alphabet.action_token(a));
        for (int i = 0; i < alphabet.num_features(); ++i)
            tokens.push_back(alphabet.feature_token(i, alphabet.obs_feature_of(obs, i)));
        tokens.push_back(alphabet.reward_token(r));
    }
}

double lang_metric(const AlphabetSpec& alphabet, const LanguageFamily& family,
                   const ExactStore& z1, const ExactStore& z2) {
    if (z1.size_n == 0 || z2.size_n == 0)
        throw UndefinedError("language metric undefined for an empty multiset");
    if (z1.suffix_steps != z2.suffix_steps)
        throw UsageError("language metric: different suffix lengths");
    if (z1.suffix_steps * alphabet.tokens_per_step() != family.ell_tokens)
        throw UsageError("language metric: family token length does not match the stores");

    std::vector<double> p1(family.size(), 0.0), p2(family.size(), 0.0);
    std::vector<int32_t> tokens;
    for (const auto& [trace, c] : z1.counts) {
        expand_step_trace(alphabet, trace, tokens);
        for (size_t x = 0; x < family.size(); ++x)
            if (contains(*family.langs[x], tokens)) p1[x] += static_cast<double>(c);
    }
    for (const auto& [trace, c] : z2.counts) {
        expand_step_trace(alphabet, trace, tokens);
        for (size_t x = 0; x < family.size(); ++x)
            if (contains(*family.langs[x], tokens)) p2[x] += static_cast<double>(c);
    }
    double best = 0.0;
    for (size_t x = 0; x < family.size(); ++x)
        best = std::max(best, std::abs(p1[x] / static_cast<double>(z1.size_n) -
                                       p2[x] / static_cast<double>(z2.size_n)));
    return best;
}

double lang_metric_counts(std::span<const uint64_t> c1, uint64_t n1,
                          std::span<const uint64_t> c2, uint64_t n2) {
    if (n1 == 0 || n2 == 0) throw UndefinedError("language metric undefined for an empty multiset");
    if (c1.size() != c2.size()) throw UsageError("language metric: count vectors differ in size");
    double best = 0.0;
    for (size_t x = 0; x < c1.size(); ++x) {
        double d = std::abs(static_cast<double>(c1[x]) / static_cast<double>(n1) -
                            static_cast<double>(c2[x]) / static_cast<double>(n2));
        best = std::max(best, d);
    }
    return best;
}

namespace {

double syntactic_log_count(const AlphabetSpec& alphabet, int suffix_steps) {
    return suffix_steps * std::log(static_cast<double>(alphabet.num_actions()) *
                                   alphabet.num_rewards() * alphabet.num_obs());
}

}  // namespace

double prefix_test_threshold(const AlphabetSpec& alphabet, int suffix_steps, double delta,
                             uint64_t n_min) {
    if (n_min == 0) throw UndefinedError("threshold undefined for an empty multiset");
    double log_term = std::log(8.0 / delta) + syntactic_log_count(alphabet, suffix_steps);
    return std::sqrt(2.0 * log_term / static_cast<double>(n_min));
}

double cms_test_threshold(const AlphabetSpec& alphabet, int suffix_steps, double delta,
                          uint64_t n_min) {
    if (n_min == 0) throw UndefinedError("threshold undefined for an empty multiset");
    double log_term = std::log(16.0 / delta) + syntactic_log_count(alphabet, suffix_steps);
    return std::sqrt(8.0 * log_term / static_cast<double>(n_min));
}

double lang_test_threshold(size_t family_size, double delta, uint64_t n_min) {
    if (n_min == 0) throw UndefinedError("threshold undefined for an empty multiset");
    if (family_size == 0) throw UsageError("threshold: empty language family");
    double log_term = std::log(4.0 * static_cast<double>(family_size) / delta);
    return std::sqrt(2.0 * log_term / static_cast<double>(n_min));
}

double cms_delta_c_for(const AlphabetSpec& alphabet, int suffix_steps, double delta) {
    // delta_c = delta / (8 (AOR)^L), computed in log space to avoid overflow.
    double log_dc = std::log(delta) - std::log(8.0) - syntactic_log_count(alphabet, suffix_steps);
    return std::exp(std::max(log_dc, -60.0));  // floor keeps the row count finite
}

TestResult test_distinct_prefix(const AlphabetSpec& alphabet, int suffix_steps,
                                const ExactStore& z1, const ExactStore& z2, double delta) {
    TestResult r;
    r.distance = prefix_linf(z1, z2);
    r.threshold =
        prefix_test_threshold(alphabet, suffix_steps, delta, std::min(z1.size_n, z2.size_n));
    r.distinct = r.distance >= r.threshold;
    return r;
}

TestResult test_distinct_cms(const AlphabetSpec& alphabet, int suffix_steps,
                             const SketchedStore& s1, const SketchedStore& s2, double delta,
                             int depth_cap) {
    TestResult r;
    r.distance = prefix_linf_cms(alphabet, s1, s2, depth_cap);
    r.threshold =
        cms_test_threshold(alphabet, suffix_steps, delta, std::min(s1.size_n, s2.size_n));
    r.distinct = r.distance >= r.threshold;
    return r;
}

TestResult test_distinct_lang(const AlphabetSpec& alphabet, const LanguageFamily& family,
                              const ExactStore& z1, const ExactStore& z2, double delta) {
    TestResult r;
    r.distance = lang_metric(alphabet, family, z1, z2);
    r.threshold = lang_test_threshold(family.size(), delta, std::min(z1.size_n, z2.size_n));
    r.distinct = r.distance >= r.threshold;
    return r;
}

}  // namespace rdpforge
