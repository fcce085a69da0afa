#include "ddx/expert_ranker.hpp"

#include <algorithm>

#include "ddx/points.hpp"

namespace ddx {

ExpertScore score_disease(const KbIndex& index, const std::vector<int>& findings_present,
                          const std::vector<int>& history_of, int disease_id,
                          const ExpertConfig& config) {
    const DiseaseDef& disease = index.disease(disease_id);
    for (int f : findings_present) index.finding(f); // unknown ids are domain errors
    for (int d : history_of) index.disease(d);

    ExpertScore s;
    s.disease_id = disease_id;
    for (const Link& l : index.profile(disease_id)) {
        if (contains_sorted(findings_present, l.finding_id))
            s.positive += es_points(l.evoking_strength);
        else
            s.negative_absent -= freq_points(l.frequency);
    }
    for (int f : findings_present) {
        if (!index.link(disease_id, f)) s.penalty_unexplained -= import_points(index.finding(f).import);
    }
    if (contains_sorted(history_of, disease_id)) {
        // raw 1..5 frequency number, not its point value; 1 when unset
        s.history_bonus = static_cast<long long>(config.history_bonus_per_frequency) *
                          disease.history_link_frequency.value_or(1);
    }
    s.total = s.positive + s.negative_absent + s.penalty_unexplained + s.history_bonus;
    return s;
}

std::vector<ExpertScore> score_all_diseases(const KbIndex& index, const Case& c,
                                            const ExpertConfig& config) {
    std::vector<ExpertScore> scores;
    scores.reserve(index.disease_ids().size());
    for (int d : index.disease_ids())
        scores.push_back(score_disease(index, c.findings_present, c.history_of, d, config));
    return scores;
}

RankedDifferential rank_expert(const KbIndex& index, const Case& c, const ExpertConfig& config) {
    std::vector<ExpertScore> scores = score_all_diseases(index, c, config);
    // integer comparison first, then the shared double-score representation
    std::sort(scores.begin(), scores.end(), [](const ExpertScore& a, const ExpertScore& b) {
        if (a.total != b.total) return a.total > b.total;
        return a.disease_id < b.disease_id;
    });
    RankedDifferential out;
    out.entries.reserve(scores.size());
    for (const ExpertScore& s : scores)
        out.entries.push_back({s.disease_id, static_cast<double>(s.total)});
    return out;
}

} // namespace ddx
