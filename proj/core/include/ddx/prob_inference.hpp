#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "ddx/dataset.hpp"
#include "ddx/knowledge_base.hpp"
#include "ddx/ranking.hpp"

namespace ddx {

enum class NbMode { positive_only, full_binary };

const char* to_string(NbMode m);
NbMode nb_mode_from_string(const std::string& s);

enum class PriorSource { uniform, empirical };

struct NbConfig {
    double floor = 0.005;
    double ceiling = 0.995;
    double denominator = 30.0; // frequency points scale to probabilities via points/denominator
};

// Class-conditional finding model: p(f|d) for profile findings, a shared leak
// probability for off-profile findings, and a disease prior.
struct CondProbTable {
    NbMode mode = NbMode::positive_only;
    double floor = 0.005;
    double ceiling = 0.995;
    double leak = 0.005;
    std::vector<int> disease_ids; // ascending; defines the class order
    std::vector<double> prior;    // aligned with disease_ids, sums to 1
    std::vector<std::vector<std::pair<int, double>>> rows; // per disease, (finding_id, p) sorted
    std::unordered_set<int> finding_universe;
};

// p(f|d) = clamp(freq_points(frequency) / denominator, floor, ceiling).
// The empirical prior is Laplace-smoothed over the training labels.
CondProbTable build_nb_model(const KnowledgeBase& kb, PriorSource prior_source,
                             NbMode mode = NbMode::positive_only, const NbConfig& config = {},
                             const Dataset* train = nullptr);

// Exact single-disease posterior in log space, softmax-normalized.
std::vector<double> posterior(const CondProbTable& model, const std::vector<int>& findings_present);

RankedDifferential rank_bayes(const CondProbTable& model, const Case& c);

nlohmann::json nb_model_to_json(const CondProbTable& model);
void save_nb_model(const CondProbTable& model, const std::string& path);

} // namespace ddx
