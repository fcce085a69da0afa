#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "ddx/dataset.hpp"
#include "ddx/knowledge_base.hpp"
#include "ddx/rng.hpp"

namespace ddx {

// Frequency score -> inclusion probability used by the case simulator.
struct InclusionMap {
    std::array<double, 5> p{0.05, 0.20, 0.50, 0.80, 0.95};

    double operator()(int freq) const {
        if (freq < 1 || freq > 5) fail("out_of_range", "frequency score must be in [1,5]");
        return p[static_cast<std::size_t>(freq - 1)];
    }
};

struct SimConfig {
    InclusionMap p_incl;
    double history_prob = 0.1; // chance the sampled disease lands in history_of

    nlohmann::json to_json() const;
    static SimConfig from_json(const nlohmann::json& j); // rejects unknown keys
};

struct SimStats {
    long long forced_nonempty = 0; // cases rescued by the empty-case guard
};

// Samples one case for `disease_id` (or a uniformly drawn disease when unset).
// Findings are built in stages: demographic links, predisposing links, then
// the remaining profile links in decreasing frequency order with exclusion
// removal and co-occurrence queue-front promotion.
Case simulate_case(const KbIndex& index, std::optional<int> disease_id, Rng& rng,
                   const SimConfig& config = {}, SimStats* stats = nullptr);

// n cases; case i is drawn from an independent stream derived from (seed, i),
// so output bytes never depend on the worker count.
Dataset simulate_dataset(const KnowledgeBase& kb, long long n_cases, std::uint64_t seed,
                         const SimConfig& config = {}, std::size_t workers = 0);

struct SplitRatios {
    double train = 8.0, validation = 1.0, test = 1.0;
};

struct SplitResult {
    Dataset train, validation, test;
};

// Per-disease split with a test floor; exact (disease, findings) duplicates of
// training cases are moved out of the test side.
SplitResult split_dataset(const Dataset& ds, const SplitRatios& ratios, int min_test_per_disease,
                          std::uint64_t seed);

// Upsamples every disease to the max per-disease count by sampling with
// replacement; originals are always kept.
Dataset resample_balance(const Dataset& train, std::uint64_t seed);

// Top-P findings by prevalence: (number of linked diseases) x (mean frequency
// points over those links), ties broken by lower finding id. The typed
// overload restricts candidates to the given finding types.
std::vector<int> prevalent_pool(const KnowledgeBase& kb, int pool_size);
std::vector<int> prevalent_pool(const KnowledgeBase& kb, int pool_size,
                                const std::set<FindingType>& types);

enum class NoiseMode { prevalent_add, random_remove };

const char* to_string(NoiseMode m);
NoiseMode noise_mode_from_string(const std::string& s);

struct NoiseSpec {
    NoiseMode mode = NoiseMode::prevalent_add;
    double fraction = 0.0; // share of corrupted cases
    int k_min = 1;
    int k_max = 5;

    nlohmann::json to_json() const;
};

// prevalent_add: adds k distinct pool findings that are absent and do not
// violate exclusions. random_remove: deletes k uniform findings, clamped so at
// least one remains. The label never changes.
Case corrupt_case(const Case& c, NoiseMode mode, int k, const std::vector<int>& pool,
                  const KbIndex& index, Rng& rng);

// Corrupts exactly floor(fraction * n) cases chosen without replacement; k is
// uniform over [k_min, k_max] per corrupted case.
Dataset make_noisy_dataset(const Dataset& ds, const NoiseSpec& spec, const std::vector<int>& pool,
                           const KnowledgeBase& kb, std::uint64_t seed);

// Keeps only findings of the given types; cases left empty are dropped and
// counted in provenance["dropped_empty"].
Dataset project_finding_types(const Dataset& ds, const std::set<FindingType>& types,
                              const KnowledgeBase& kb);

} // namespace ddx
