#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddx/dataset.hpp"
#include "ddx/knowledge_base.hpp"

namespace ddx {

// An externally labeled case: free-form finding and disease names, reconciled
// against the KB before use.
struct ExternalCase {
    std::vector<std::string> finding_names;
    std::string disease_name;
    std::string source;
};

// JSONL: {"findings": ["name", ...], "disease": "name", "source": "tag"}.
// Lenient mode skips malformed lines and reports them with line numbers;
// strict mode aborts on the first one.
std::vector<ExternalCase> load_external_cases(const std::string& path, bool strict = false,
                                              std::vector<std::string>* issues = nullptr);
void save_external_cases(const std::vector<ExternalCase>& cases, const std::string& path);

enum class NewFindingPolicy { reject, create };

struct ReconcileResult {
    KnowledgeBase kb;            // extended copy; the input KB is never touched
    std::vector<Case> cases;     // mapped to KB ids
    std::vector<int> new_disease_ids;
    std::vector<int> new_finding_ids;
};

// Disease names match case-insensitively against primary names and aliases;
// unmatched names become new diseases. Finding names match exactly after
// normalization; unmatched findings follow the policy (reject errors, create
// appends symptom-type findings with a mid-scale import).
ReconcileResult reconcile(const std::vector<ExternalCase>& external, const KnowledgeBase& kb,
                          NewFindingPolicy policy);

struct MergeResult {
    Dataset combined_train;
    Dataset external_test;
};

// Holds out holdout_fraction (at least 1 case, at most n-1) of each external
// disease for testing; the rest joins the simulated training set. With
// fraction 0 everything goes to training and the empty test set is flagged in
// provenance.
MergeResult merge_with_holdout(const Dataset& sim_train, const std::vector<Case>& external,
                               double holdout_fraction, std::uint64_t seed,
                               const std::string& kb_fingerprint = "");

// Synthetic stand-in for an EHR-derived source: cases for a few diseases that
// already exist in the KB (referred to by alias where available) plus brand
// new diseases with invented findings. label_noise reassigns that share of
// case labels uniformly among the other external diseases.
struct ExternalGenConfig {
    int n_new_diseases = 5;
    int n_alias_diseases = 2;
    int cases_per_disease = 120;
    double label_noise = 0.0;
    int new_profile_size = 8;       // findings per new-disease profile
    int new_exclusive_findings = 6; // invented findings among them
    std::string source_tag = "synthetic-ehr";

    nlohmann::json to_json() const;
    static ExternalGenConfig from_json(const nlohmann::json& j); // rejects unknown keys
};

std::vector<ExternalCase> make_external_cases(const KnowledgeBase& kb,
                                              const ExternalGenConfig& config, std::uint64_t seed);

} // namespace ddx
