#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ddx/errors.hpp"

namespace ddx {

enum class FindingType { history, symptom, sign, lab, demographic };

constexpr int kNumFindingTypes = 5;

const char* to_string(FindingType t);
FindingType finding_type_from_string(const std::string& s);

struct FindingDef {
    int id = 0;
    std::string name;          // lowercase words, single spaces
    FindingType ftype = FindingType::symptom;
    int import = 1;            // 1..5, disease-independent
};

struct DiseaseDef {
    int id = 0;
    std::string name;
    std::vector<std::string> aliases;
    std::optional<int> history_link_frequency; // 1..5, feeds the history bonus
};

struct Link {
    int disease_id = 0;
    int finding_id = 0;
    int evoking_strength = 1; // 1..5
    int frequency = 1;        // 1..5
};

// Findings that cannot manifest together; a case holds at most one member.
struct ExclusionGroup {
    std::vector<int> finding_ids; // sorted, size >= 2
};

struct CoOccurrencePair {
    int finding_a = 0; // canonical a < b
    int finding_b = 0;
    double strength = 0.5; // (0, 1]
};

struct KnowledgeBase {
    std::vector<FindingDef> findings;
    std::vector<DiseaseDef> diseases;
    std::vector<Link> links;
    std::vector<ExclusionGroup> exclusions;
    std::vector<CoOccurrencePair> cooccurrences;
    std::vector<std::pair<int, int>> predisposing; // (disease_id, finding_id) of links sampled first
};

struct Violation {
    std::string code;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Collects every referential, uniqueness and range violation. Violations are
// data, not failures.
ValidationReport validate_kb(const KnowledgeBase& kb);

// Sorts all collections into the canonical order used by serialization and
// fingerprinting (findings/diseases by id, links by (disease, finding), ...).
void canonicalize(KnowledgeBase& kb);

std::string serialize_kb(const KnowledgeBase& kb);            // canonical JSON text
void save_kb(const KnowledgeBase& kb, const std::string& path);
KnowledgeBase load_kb(const std::string& path);               // parse + validate
KnowledgeBase parse_kb(const std::string& text);

// Content hash of the canonical serialization.
std::string kb_fingerprint(const KnowledgeBase& kb);

// Read-only lookup structure over an immutable KnowledgeBase. Construction
// assumes the KB is valid; the KB must outlive the index.
class KbIndex {
public:
    explicit KbIndex(const KnowledgeBase& kb);

    const KnowledgeBase& kb() const { return *kb_; }

    bool has_finding(int id) const { return finding_pos_.count(id) > 0; }
    bool has_disease(int id) const { return disease_pos_.count(id) > 0; }
    const FindingDef& finding(int id) const;
    const DiseaseDef& disease(int id) const;

    // Links of one disease, sorted by finding id.
    const std::vector<Link>& profile(int disease_id) const;
    const Link* link(int disease_id, int finding_id) const;
    bool is_predisposing(int disease_id, int finding_id) const;

    const std::vector<int>& exclusion_partners(int finding_id) const;
    const std::vector<std::pair<int, double>>& cooccur_partners(int finding_id) const;

    // Disease ids in ascending order; also the class order used by models.
    const std::vector<int>& disease_ids() const { return disease_ids_; }
    int n_diseases() const { return static_cast<int>(disease_ids_.size()); }

private:
    const KnowledgeBase* kb_;
    std::unordered_map<int, std::size_t> finding_pos_;
    std::unordered_map<int, std::size_t> disease_pos_;
    std::unordered_map<int, std::vector<Link>> profiles_;
    std::unordered_map<long long, const Link*> link_by_pair_;
    std::unordered_map<long long, bool> predisposing_;
    std::unordered_map<int, std::vector<int>> exclusion_partners_;
    std::unordered_map<int, std::vector<std::pair<int, double>>> cooccur_partners_;
    std::vector<int> disease_ids_;
    std::vector<Link> empty_profile_;
    std::vector<int> empty_ints_;
    std::vector<std::pair<int, double>> empty_cooccur_;
};

} // namespace ddx
