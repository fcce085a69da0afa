#include "ddx/prob_inference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ddx/points.hpp"

namespace ddx {

using nlohmann::json;

const char* to_string(NbMode m) {
    return m == NbMode::positive_only ? "positive_only" : "full_binary";
}

NbMode nb_mode_from_string(const std::string& s) {
    if (s == "positive_only") return NbMode::positive_only;
    if (s == "full_binary") return NbMode::full_binary;
    fail("config", "unknown bayes mode '" + s + "'");
}

CondProbTable build_nb_model(const KnowledgeBase& kb, PriorSource prior_source, NbMode mode,
                             const NbConfig& config, const Dataset* train) {
    if (!(config.floor > 0.0 && config.ceiling < 1.0 && config.floor <= config.ceiling))
        fail("config", "probability clamp must satisfy 0 < floor <= ceiling < 1");
    if (kb.diseases.empty()) fail("config", "knowledge base holds no diseases");

    KbIndex index(kb);
    CondProbTable model;
    model.mode = mode;
    model.floor = config.floor;
    model.ceiling = config.ceiling;
    model.leak = config.floor;
    model.disease_ids = index.disease_ids();
    for (const auto& f : kb.findings) model.finding_universe.insert(f.id);

    model.rows.resize(model.disease_ids.size());
    for (std::size_t k = 0; k < model.disease_ids.size(); ++k) {
        for (const Link& l : index.profile(model.disease_ids[k])) {
            double p = static_cast<double>(freq_points(l.frequency)) / config.denominator;
            p = std::clamp(p, config.floor, config.ceiling);
            model.rows[k].push_back({l.finding_id, p});
        }
        std::sort(model.rows[k].begin(), model.rows[k].end());
    }

    std::size_t n = model.disease_ids.size();
    model.prior.assign(n, 0.0);
    if (prior_source == PriorSource::uniform) {
        for (double& p : model.prior) p = 1.0 / static_cast<double>(n);
    } else {
        if (!train || train->cases.empty()) fail("config", "empirical prior needs a non-empty training set");
        std::unordered_map<int, std::size_t> pos;
        for (std::size_t k = 0; k < n; ++k) pos[model.disease_ids[k]] = k;
        std::vector<long long> counts(n, 0);
        for (const Case& c : train->cases) {
            auto it = pos.find(c.disease_id);
            if (it == pos.end()) fail("unknown_disease", "training case labels unknown disease " +
                                                             std::to_string(c.disease_id));
            ++counts[it->second];
        }
        // Laplace smoothing keeps every prior strictly positive.
        double denom = static_cast<double>(train->cases.size()) + static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k)
            model.prior[k] = (static_cast<double>(counts[k]) + 1.0) / denom;
    }
    return model;
}

std::vector<double> posterior(const CondProbTable& model, const std::vector<int>& findings_present) {
    for (int f : findings_present) {
        if (!model.finding_universe.count(f))
            fail("unknown_finding", "finding id " + std::to_string(f));
    }
    std::size_t n = model.disease_ids.size();
    std::vector<double> log_score(n);
    for (std::size_t k = 0; k < n; ++k) {
        double s = std::log(model.prior[k]);
        const auto& row = model.rows[k];
        for (int f : findings_present) {
            auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(f, 0.0),
                                       [](const auto& a, const auto& b) { return a.first < b.first; });
            double p = (it != row.end() && it->first == f) ? it->second : model.leak;
            s += std::log(p);
        }
        if (model.mode == NbMode::full_binary) {
            for (const auto& [f, p] : row) {
                if (!contains_sorted(findings_present, f)) s += std::log1p(-p);
            }
        }
        log_score[k] = s;
    }
    double max_score = *std::max_element(log_score.begin(), log_score.end());
    std::vector<double> out(n);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = std::exp(log_score[k] - max_score);
        total += out[k];
    }
    for (double& p : out) p /= total;
    return out;
}

RankedDifferential rank_bayes(const CondProbTable& model, const Case& c) {
    std::vector<double> p = posterior(model, c.findings_present);
    RankedDifferential out;
    out.entries.reserve(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) out.entries.push_back({model.disease_ids[k], p[k]});
    sort_ranked(out.entries);
    return out;
}

json nb_model_to_json(const CondProbTable& model) {
    json j;
    j["model"] = "naive_bayes";
    j["mode"] = to_string(model.mode);
    j["floor"] = model.floor;
    j["ceiling"] = model.ceiling;
    j["leak"] = model.leak;
    json diseases = json::array();
    for (std::size_t k = 0; k < model.disease_ids.size(); ++k) {
        json row;
        row["disease"] = model.disease_ids[k];
        row["prior"] = model.prior[k];
        json probs = json::array();
        for (const auto& [f, p] : model.rows[k]) probs.push_back({{"finding", f}, {"p", p}});
        row["p_present"] = probs;
        diseases.push_back(row);
    }
    j["diseases"] = diseases;
    return j;
}

void save_nb_model(const CondProbTable& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io", "cannot open '" + path + "' for writing");
    out << nb_model_to_json(model).dump(2) << "\n";
}

} // namespace ddx
