#include "ddx/eval.hpp"

#include <algorithm>
#include <fstream>

#include "ddx/parallel.hpp"

namespace ddx {

using nlohmann::json;

double topk_accuracy(const std::vector<RankedDifferential>& rankings, const std::vector<int>& labels,
                     int k) {
    if (rankings.size() != labels.size())
        fail("shape_mismatch", "one ranking is required per label");
    if (rankings.empty()) fail("empty_request", "no rankings to score");
    if (k < 1) fail("config", "k must be >= 1");
    long long hits = 0;
    for (std::size_t i = 0; i < rankings.size(); ++i) {
        const auto& entries = rankings[i].entries;
        if (static_cast<std::size_t>(k) > entries.size())
            fail("config", "k exceeds the ranking length");
        for (int j = 0; j < k; ++j) {
            if (entries[static_cast<std::size_t>(j)].disease_id == labels[i]) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

Ranker make_expert_ranker(const KbIndex& index) {
    return {"expert", [&index](const Case& c) { return rank_expert(index, c); }};
}

Ranker make_bayes_ranker(const CondProbTable& model) {
    return {"bayes", [&model](const Case& c) { return rank_bayes(model, c); }};
}

namespace {

RankedDifferential ranked_from_probs(const std::vector<double>& probs, const LabelMap& labels) {
    RankedDifferential out;
    out.entries.reserve(probs.size());
    for (std::size_t k = 0; k < probs.size(); ++k)
        out.entries.push_back({labels.class_to_disease[k], probs[k]});
    sort_ranked(out.entries);
    return out;
}

} // namespace

Ranker make_lr_ranker(const LRModel& model, const Vocabulary& vocab, const LabelMap& labels,
                      const KbIndex& index, int seq_len) {
    return {"lr", [&model, &vocab, &labels, &index, seq_len](const Case& c) {
                return ranked_from_probs(lr_predict(model, encode_tokens(vocab, c, index, seq_len)),
                                         labels);
            }};
}

Ranker make_convnet_ranker(const ConvNet& model, const Vocabulary& vocab, const LabelMap& labels,
                           const KbIndex& index, std::string name) {
    int seq_len = model.cfg.seq_len;
    return {std::move(name), [&model, &vocab, &labels, &index, seq_len](const Case& c) {
                return ranked_from_probs(
                    convnet_predict(model, encode_tokens(vocab, c, index, seq_len)), labels);
            }};
}

EvalResult evaluate_ranker(const Ranker& ranker, const Dataset& test,
                           const std::string& dataset_descriptor) {
    EvalResult r;
    r.ranker = ranker.name;
    r.dataset = dataset_descriptor;
    r.n_cases = static_cast<long long>(test.cases.size());
    if (test.cases.empty()) {
        r.skipped = true;
        return r;
    }
    std::vector<std::array<int, 2>> hits(test.cases.size()); // {hit@1, hit@3}
    parallel_for(test.cases.size(), [&](std::size_t i) {
        RankedDifferential ranked = ranker.rank(test.cases[i]);
        int label = test.cases[i].disease_id;
        int k3 = std::min<int>(3, static_cast<int>(ranked.entries.size()));
        int h1 = 0, h3 = 0;
        for (int j = 0; j < k3; ++j) {
            if (ranked.entries[static_cast<std::size_t>(j)].disease_id == label) {
                h3 = 1;
                if (j == 0) h1 = 1;
                break;
            }
        }
        hits[i] = {h1, h3};
    });
    for (std::size_t i = 0; i < test.cases.size(); ++i) {
        r.top1_hits += hits[i][0];
        r.top3_hits += hits[i][1];
        auto& row = r.per_disease[test.cases[i].disease_id];
        ++row[0];
        row[1] += hits[i][0];
        row[2] += hits[i][1];
    }
    return r;
}

namespace {

std::string num(double v) { return json(v).dump(); } // shortest round-trip, shared with JSON output

std::string csv_rows(const EvalResult& r) {
    std::string base = r.ranker + "," + r.dataset + "," + r.mode + "," + num(r.fraction) + ",";
    std::string tail = "," + std::to_string(r.n_cases) + "," + std::to_string(r.seed) + "," +
                       r.plan_hash + "\n";
    if (r.skipped) return base + "skipped,," + std::to_string(r.n_cases) + "," +
                          std::to_string(r.seed) + "," + r.plan_hash + "\n";
    return base + "1," + num(r.top1()) + tail + base + "3," + num(r.top3()) + tail;
}

} // namespace

void write_report_csv(const std::vector<EvalResult>& results, const std::string& path) {
    if (results.empty()) fail("empty_request", "no results to report");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io", "cannot open '" + path + "' for writing");
    out << "ranker,dataset,mode,fraction,k,accuracy,n,seed,plan_hash\n";
    for (const auto& r : results) out << csv_rows(r);
    if (!out) fail("io", "failed writing '" + path + "'");
}

void write_report_json(const std::vector<EvalResult>& results, const std::string& path) {
    if (results.empty()) fail("empty_request", "no results to report");
    json arr = json::array();
    for (const auto& r : results) {
        json e;
        e["ranker"] = r.ranker;
        e["dataset"] = r.dataset;
        e["mode"] = r.mode;
        e["fraction"] = r.fraction;
        e["n"] = r.n_cases;
        e["seed"] = r.seed;
        e["plan_hash"] = r.plan_hash;
        e["skipped"] = r.skipped;
        if (!r.skipped) {
            e["top1"] = r.top1();
            e["top3"] = r.top3();
            e["top1_hits"] = r.top1_hits;
            e["top3_hits"] = r.top3_hits;
            json per = json::object();
            for (const auto& [d, row] : r.per_disease) {
                per[std::to_string(d)] = {{"n", row[0]}, {"top1_hits", row[1]}, {"top3_hits", row[2]}};
            }
            e["per_disease"] = per;
        }
        arr.push_back(e);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io", "cannot open '" + path + "' for writing");
    out << arr.dump(2) << "\n";
    if (!out) fail("io", "failed writing '" + path + "'");
}

void write_report(const std::vector<EvalResult>& results, const std::string& path,
                  const std::string& format) {
    if (format == "csv") write_report_csv(results, path);
    else if (format == "json") write_report_json(results, path);
    else fail("config", "unknown report format '" + format + "'");
}

void write_plot_data(const std::vector<EvalResult>& results, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io", "cannot open '" + path + "' for writing");
    out << "series,fraction,accuracy\n";
    for (const auto& r : results) {
        if (r.skipped) continue;
        out << r.ranker << "+" << r.mode << "," << num(r.fraction) << "," << num(r.top1()) << "\n";
    }
}

} // namespace ddx
