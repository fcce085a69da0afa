#pragma once

#include <array>
#include <cstdint>

#include "json.hpp"

#include "ddx/knowledge_base.hpp"

namespace ddx {

// Configuration of the seeded synthetic knowledge-base generator. Indexing of
// the per-type arrays follows FindingType order: history, symptom, sign, lab,
// demographic. Score weights are categorical weights over scores 1..5.
//
// Profiles are distinctive by construction: a per-type slice of the finding
// pool is reserved as disease-private, and exclusive_fraction of each profile
// is drawn from the owning disease's private slice. Private links carry high
// evoking strength and import, shared links low, so widely shared findings
// behave like the low-signal prevalent findings of a curated KB.
struct KbGenConfig {
    int n_diseases = 50;
    std::array<int, kNumFindingTypes> finding_counts{40, 70, 90, 60, 8};
    std::array<int, kNumFindingTypes> profile_min{1, 2, 2, 1, 0};
    std::array<int, kNumFindingTypes> profile_max{3, 6, 6, 4, 2};
    double exclusive_fraction = 0.5;

    std::array<double, 5> evoking_weights_shared{0.30, 0.35, 0.20, 0.10, 0.05};
    std::array<double, 5> evoking_weights_exclusive{0.00, 0.05, 0.15, 0.40, 0.40};
    std::array<double, 5> frequency_weights{0.05, 0.15, 0.30, 0.30, 0.20};
    std::array<double, 5> import_weights_shared{0.40, 0.35, 0.15, 0.07, 0.03};
    std::array<double, 5> import_weights_exclusive{0.05, 0.15, 0.30, 0.30, 0.20};

    int exclusion_groups = 4;
    int exclusion_group_size = 2;
    int cooccurrence_pairs = 8;
    double cooccurrence_strength_min = 0.5;
    double cooccurrence_strength_max = 0.9;

    double predisposing_fraction = 0.5; // applied to history-type links
    double history_link_prob = 0.6;     // chance a disease carries history_link_frequency
    double alias_prob = 0.3;
};

// Throws Error("infeasible_config") when the config cannot yield a valid KB.
void check_feasible(const KbGenConfig& config);

// Pure function of (config, seed): equal inputs give byte-equal serialized
// output. The result always passes validate_kb.
KnowledgeBase generate_synthetic_kb(const KbGenConfig& config, std::uint64_t seed);

nlohmann::json kbgen_config_to_json(const KbGenConfig& config);
KbGenConfig kbgen_config_from_json(const nlohmann::json& j); // rejects unknown keys

} // namespace ddx
