#pragma once

#include <vector>

#include "ddx/dataset.hpp"
#include "ddx/knowledge_base.hpp"
#include "ddx/ranking.hpp"

namespace ddx {

// One disease's score under the four-component expert rule. All arithmetic is
// exact integer; total is the plain sum of the components.
struct ExpertScore {
    int disease_id = 0;
    long long positive = 0;            // evoking-strength points of present profile findings
    long long negative_absent = 0;     // minus frequency points of absent profile findings
    long long penalty_unexplained = 0; // minus import points of present off-profile findings
    long long history_bonus = 0;       // 20 x history frequency number when disease is in history
    long long total = 0;
};

struct ExpertConfig {
    int history_bonus_per_frequency = 20;
};

// findings_present and history_of must be sorted id vectors referencing the KB.
ExpertScore score_disease(const KbIndex& index, const std::vector<int>& findings_present,
                          const std::vector<int>& history_of, int disease_id,
                          const ExpertConfig& config = {});

std::vector<ExpertScore> score_all_diseases(const KbIndex& index, const Case& c,
                                            const ExpertConfig& config = {});

RankedDifferential rank_expert(const KbIndex& index, const Case& c, const ExpertConfig& config = {});

} // namespace ddx
