#pragma once

// Distances between empirical suffix distributions and the statistical tests
// that decide whether two candidate states are distinct.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rdpforge/alphabet.hpp"
#include "rdpforge/cms.hpp"
#include "rdpforge/lang.hpp"

namespace rdpforge {

enum class TesterKind { PrefixExact, PrefixCms, Language };

const char* tester_kind_name(TesterKind kind);
TesterKind tester_kind_from(const std::string& name);

struct TesterConfig {
    TesterKind kind = TesterKind::Language;
    double delta = 0.05;
    // Language kind: hierarchy coordinates of the family.
    int fam_i = 1, fam_j = 1, fam_k = 1;
    size_t family_cap = 1000000;
    // PrefixCms kind: parameter overrides and the enumeration depth cap used
    // by the learner (-1 enumerates the full syntactic prefix space; the
    // desk-scale default walks prefixes up to two steps deep).
    std::optional<double> cms_delta_c;
    std::optional<double> cms_epsilon;
    int cms_depth_cap = 2;
    // Sketched suffix stores are only sound for the prefix metric.
    bool sketched_stores = false;

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) throw UsageError("tester: delta must be in (0,1)");
        if (fam_i < 1 || fam_j < 1 || fam_k < 1) throw UsageError("tester: family indices >= 1");
        if (sketched_stores && kind != TesterKind::PrefixCms)
            throw ConfigError(std::string("tester: sketched stores cannot back the ") +
                              tester_kind_name(kind) +
                              " metric (language probabilities may overlap)");
    }
};

// Multiset of suffix traces at step granularity; keys are step-symbol
// sequences (see AlphabetSpec::step_sym).
struct ExactStore {
    int suffix_steps = 0;
    uint64_t size_n = 0;
    std::map<std::vector<int32_t>, uint64_t> counts;

    void add(const std::vector<int32_t>& trace, uint64_t count = 1);
    void merge(const ExactStore& other);
};

// One sketch per prefix depth u = 1..suffix_steps, all sharing hash seeds.
struct SketchedStore {
    int suffix_steps = 0;
    uint64_t size_n = 0;
    uint64_t seed = 0;
    std::vector<Sketch> per_depth;

    static SketchedStore make(int suffix_steps, double delta_c, double epsilon, uint64_t seed);
    void add(std::span<const int32_t> trace, uint64_t count = 1);
    void merge(const SketchedStore& other);
    uint64_t query_prefix(std::span<const int32_t> prefix) const;
};

// max over prefix lengths u and prefixes occurring in either multiset of the
// absolute difference of empirical prefix probabilities.
double prefix_linf(const ExactStore& z1, const ExactStore& z2);

// Same quantity from sketches, maximizing over the full syntactic prefix
// space (A x O x R)^u, u <= depth_cap (or suffix_steps when depth_cap < 0).
double prefix_linf_cms(const AlphabetSpec& alphabet, const SketchedStore& s1,
                       const SketchedStore& s2, int depth_cap = -1);

// max over family members of |p1(X) - p2(X)| with empirical probabilities.
double lang_metric(const AlphabetSpec& alphabet, const LanguageFamily& family,
                   const ExactStore& z1, const ExactStore& z2);

// Distance from precomputed per-language membership counts.
double lang_metric_counts(std::span<const uint64_t> c1, uint64_t n1,
                          std::span<const uint64_t> c2, uint64_t n2);

double prefix_test_threshold(const AlphabetSpec& alphabet, int suffix_steps, double delta,
                             uint64_t n_min);
double cms_test_threshold(const AlphabetSpec& alphabet, int suffix_steps, double delta,
                          uint64_t n_min);
double lang_test_threshold(size_t family_size, double delta, uint64_t n_min);

// delta_c used for the sketches backing the CMS test at a given layer.
double cms_delta_c_for(const AlphabetSpec& alphabet, int suffix_steps, double delta);

struct TestResult {
    bool distinct = false;
    double distance = 0.0;
    double threshold = 0.0;
};

TestResult test_distinct_prefix(const AlphabetSpec& alphabet, int suffix_steps,
                                const ExactStore& z1, const ExactStore& z2, double delta);
TestResult test_distinct_cms(const AlphabetSpec& alphabet, int suffix_steps,
                             const SketchedStore& s1, const SketchedStore& s2, double delta,
                             int depth_cap = -1);
TestResult test_distinct_lang(const AlphabetSpec& alphabet, const LanguageFamily& family,
                              const ExactStore& z1, const ExactStore& z2, double delta);

// Token expansion of a step-symbol trace (for language membership).
void expand_step_trace(const AlphabetSpec& alphabet, std::span<const int32_t> step_trace,
                       std::vector<int32_t>& tokens);

}  // namespace rdpforge
