#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ddx/dataset.hpp"
#include "ddx/expert_ranker.hpp"
#include "ddx/ml/convnet.hpp"
#include "ddx/ml/logistic.hpp"
#include "ddx/prob_inference.hpp"
#include "ddx/ranking.hpp"

namespace ddx {

struct EvalResult {
    std::string ranker;
    std::string dataset;
    std::string mode = "clean";
    double fraction = 0.0;
    long long n_cases = 0;
    long long top1_hits = 0;
    long long top3_hits = 0;
    std::uint64_t seed = 0;
    std::string plan_hash;
    bool skipped = false;
    std::map<int, std::array<long long, 3>> per_disease; // disease -> {n, hits@1, hits@3}

    double top1() const { return n_cases ? static_cast<double>(top1_hits) / static_cast<double>(n_cases) : 0.0; }
    double top3() const { return n_cases ? static_cast<double>(top3_hits) / static_cast<double>(n_cases) : 0.0; }
};

// Fraction of cases whose label appears among the first k ranked entries.
double topk_accuracy(const std::vector<RankedDifferential>& rankings, const std::vector<int>& labels,
                     int k);

// A named ranking function over cases; all four methods reduce to this shape.
struct Ranker {
    std::string name;
    std::function<RankedDifferential(const Case&)> rank;
};

Ranker make_expert_ranker(const KbIndex& index);
Ranker make_bayes_ranker(const CondProbTable& model);
Ranker make_lr_ranker(const LRModel& model, const Vocabulary& vocab, const LabelMap& labels,
                      const KbIndex& index, int seq_len);
Ranker make_convnet_ranker(const ConvNet& model, const Vocabulary& vocab, const LabelMap& labels,
                           const KbIndex& index, std::string name = "convnet");

// Ranks every case (top-3 uses min(3, #diseases)) and tallies hits.
EvalResult evaluate_ranker(const Ranker& ranker, const Dataset& test,
                           const std::string& dataset_descriptor);

// Stable column order: ranker,dataset,mode,fraction,k,accuracy,n,seed,plan_hash.
// Each result renders one row per k in {1, 3}; numeric formatting matches the
// JSON rendering byte for byte.
void write_report_csv(const std::vector<EvalResult>& results, const std::string& path);
void write_report_json(const std::vector<EvalResult>& results, const std::string& path);
void write_report(const std::vector<EvalResult>& results, const std::string& path,
                  const std::string& format); // "csv" | "json"

// (series=ranker+mode, x=fraction, y=top-1 accuracy) triples for plotting.
void write_plot_data(const std::vector<EvalResult>& results, const std::string& path);

} // namespace ddx
