#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ddx/eval.hpp"
#include "ddx/kb_generate.hpp"
#include "ddx/simulator.hpp"

namespace ddx {

// Declarative experiment description. Every stage seed is derived from the
// single plan seed, so a plan file pins its outputs byte for byte.
struct ExperimentPlan {
    std::string kb_path;      // empty -> generate from kb_gen
    KbGenConfig kb_gen;
    std::string dataset_path; // empty -> simulate n_cases
    long long n_cases = 20000;
    SimConfig sim;

    SplitRatios ratios;
    int min_test_per_disease = 10;
    std::set<FindingType> train_types{FindingType::history, FindingType::symptom, FindingType::sign};

    std::vector<std::string> rankers{"expert", "bayes", "lr", "convnet"};
    TrainConfig train;
    ConvNetConfig convnet; // vocab_size / n_classes bound at runtime
    int convnet_noise_augment = 2;

    int pool_size = 30;
    std::vector<NoiseMode> noise_modes;
    std::vector<double> noise_fractions;
    std::vector<std::set<FindingType>> ablation_subsets;

    std::string output_path = "report.csv";
    std::string format = "csv";
    std::string plot_data_path; // empty -> none
    std::uint64_t seed = 1;

    nlohmann::json to_json() const;
    static ExperimentPlan from_json(const nlohmann::json& j); // rejects unknown keys
    static ExperimentPlan load(const std::string& path);
    std::string hash() const;

    std::uint64_t stage_seed(std::uint64_t stage) const { return derive_seed(seed, stage); }
};

// Materialized artifacts of a plan: KB, splits, pool, trained models.
struct ExperimentArtifacts {
    KnowledgeBase kb;
    std::unique_ptr<KbIndex> index;
    Dataset train_full, val_full, test_full; // unprojected splits
    Dataset train_proj, val_proj, test_proj; // projected to plan.train_types, train balanced
    std::vector<int> pool;
    Vocabulary vocab;
    LabelMap labels;
    CondProbTable bayes;
    std::optional<LRModel> lr;
    std::optional<ConvNet> convnet;       // clean-trained
    std::optional<ConvNet> convnet_noise; // noise-augmented training
};

// Runs kb -> simulate -> split -> balance -> train for every ranker the plan
// names. Throws Error("fingerprint_mismatch") when a referenced dataset was
// built from a different KB, Error("missing_artifact") for unresolvable paths.
ExperimentArtifacts prepare_artifacts(const ExperimentPlan& plan);

std::vector<Ranker> plan_rankers(const ExperimentPlan& plan, const ExperimentArtifacts& art);

// One row per (ranker, type subset); the test split is projected per subset,
// learned models stay trained on the plan's training projection. Empty
// projections become skipped rows.
std::vector<EvalResult> run_ablation(const ExperimentPlan& plan, const ExperimentArtifacts& art,
                                     const std::vector<std::set<FindingType>>& subsets);

// Grid over plan.noise_modes x plan.noise_fractions on the projected test set.
std::vector<EvalResult> run_noise_sweep(const ExperimentPlan& plan, const ExperimentArtifacts& art);

struct PipelineResult {
    std::vector<EvalResult> results;
    std::vector<std::string> written_files;
};

// Full chain: artifacts, clean evaluation, optional ablation and noise sweep,
// report (and plot data) emission.
PipelineResult pipeline_run(const ExperimentPlan& plan);

} // namespace ddx
