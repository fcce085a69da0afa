#include "ddx/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ddx/hash.hpp"
#include "ddx/ml/model_io.hpp"

namespace ddx {

using nlohmann::json;

namespace {

// stage tags for seed derivation
constexpr std::uint64_t kStageKb = 1;
constexpr std::uint64_t kStageData = 2;
constexpr std::uint64_t kStageSplit = 3;
constexpr std::uint64_t kStageBalance = 4;
constexpr std::uint64_t kStageTrain = 5;
constexpr std::uint64_t kStageNoiseBase = 100;

json types_to_json(const std::set<FindingType>& types) {
    json arr = json::array();
    for (FindingType t : types) arr.push_back(to_string(t));
    return arr;
}

std::set<FindingType> types_from_json(const json& arr) {
    if (!arr.is_array()) fail("config", "finding type lists must be arrays");
    std::set<FindingType> out;
    for (const auto& t : arr) out.insert(finding_type_from_string(t.get<std::string>()));
    if (out.empty()) fail("config", "finding type lists cannot be empty");
    return out;
}

std::string types_label(const std::set<FindingType>& types) {
    std::string s;
    for (FindingType t : types) {
        if (!s.empty()) s += "+";
        s += to_string(t);
    }
    return s;
}

} // namespace

json ExperimentPlan::to_json() const {
    json j;
    j["kb_path"] = kb_path;
    j["kb_gen"] = kbgen_config_to_json(kb_gen);
    j["dataset_path"] = dataset_path;
    j["n_cases"] = n_cases;
    j["sim"] = sim.to_json();
    j["ratios"] = {ratios.train, ratios.validation, ratios.test};
    j["min_test_per_disease"] = min_test_per_disease;
    j["train_types"] = types_to_json(train_types);
    j["rankers"] = rankers;
    j["train"] = train.to_json();
    j["convnet"] = convnet.to_json();
    j["convnet_noise_augment"] = convnet_noise_augment;
    j["pool_size"] = pool_size;
    json modes = json::array();
    for (NoiseMode m : noise_modes) modes.push_back(to_string(m));
    j["noise_modes"] = modes;
    j["noise_fractions"] = noise_fractions;
    json subsets = json::array();
    for (const auto& s : ablation_subsets) subsets.push_back(types_to_json(s));
    j["ablation_subsets"] = subsets;
    j["output_path"] = output_path;
    j["format"] = format;
    j["plot_data_path"] = plot_data_path;
    j["seed"] = seed;
    return j;
}

ExperimentPlan ExperimentPlan::from_json(const json& j) {
    static const std::set<std::string> allowed = {
        "kb_path", "kb_gen", "dataset_path", "n_cases", "sim", "ratios", "min_test_per_disease",
        "train_types", "rankers", "train", "convnet", "convnet_noise_augment", "pool_size",
        "noise_modes", "noise_fractions", "ablation_subsets", "output_path", "format",
        "plot_data_path", "seed"};
    if (!j.is_object()) fail("config", "experiment plan must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) fail("config", "unknown plan key '" + it.key() + "'");
    }
    ExperimentPlan p;
    if (j.contains("kb_path")) p.kb_path = j.at("kb_path").get<std::string>();
    if (j.contains("kb_gen")) p.kb_gen = kbgen_config_from_json(j.at("kb_gen"));
    if (j.contains("dataset_path")) p.dataset_path = j.at("dataset_path").get<std::string>();
    if (j.contains("n_cases")) p.n_cases = j.at("n_cases").get<long long>();
    if (j.contains("sim")) p.sim = SimConfig::from_json(j.at("sim"));
    if (j.contains("ratios")) {
        const json& r = j.at("ratios");
        if (!r.is_array() || r.size() != 3) fail("config", "ratios must be [train, validation, test]");
        p.ratios = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>()};
    }
    if (j.contains("min_test_per_disease"))
        p.min_test_per_disease = j.at("min_test_per_disease").get<int>();
    if (j.contains("train_types")) p.train_types = types_from_json(j.at("train_types"));
    if (j.contains("rankers")) p.rankers = j.at("rankers").get<std::vector<std::string>>();
    if (j.contains("train")) p.train = TrainConfig::from_json(j.at("train"));
    if (j.contains("convnet")) p.convnet = ConvNetConfig::from_json(j.at("convnet"));
    if (j.contains("convnet_noise_augment"))
        p.convnet_noise_augment = j.at("convnet_noise_augment").get<int>();
    if (j.contains("pool_size")) p.pool_size = j.at("pool_size").get<int>();
    if (j.contains("noise_modes")) {
        for (const auto& m : j.at("noise_modes"))
            p.noise_modes.push_back(noise_mode_from_string(m.get<std::string>()));
    }
    if (j.contains("noise_fractions"))
        p.noise_fractions = j.at("noise_fractions").get<std::vector<double>>();
    if (j.contains("ablation_subsets")) {
        for (const auto& s : j.at("ablation_subsets")) p.ablation_subsets.push_back(types_from_json(s));
    }
    if (j.contains("output_path")) p.output_path = j.at("output_path").get<std::string>();
    if (j.contains("format")) p.format = j.at("format").get<std::string>();
    if (j.contains("plot_data_path")) p.plot_data_path = j.at("plot_data_path").get<std::string>();
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    return p;
}

ExperimentPlan ExperimentPlan::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("missing_artifact", "cannot open plan file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::exception& e) {
        fail("parse", "plan file '" + path + "': " + e.what());
    }
    return from_json(j);
}

std::string ExperimentPlan::hash() const { return content_hash(to_json().dump()); }

ExperimentArtifacts prepare_artifacts(const ExperimentPlan& plan) {
    ExperimentArtifacts art;

    if (!plan.kb_path.empty()) {
        if (!std::filesystem::exists(plan.kb_path))
            fail("missing_artifact", "knowledge base '" + plan.kb_path + "' does not exist");
        art.kb = load_kb(plan.kb_path);
    } else {
        art.kb = generate_synthetic_kb(plan.kb_gen, plan.stage_seed(kStageKb));
    }
    art.index = std::make_unique<KbIndex>(art.kb);
    const std::string fingerprint = kb_fingerprint(art.kb);

    Dataset full;
    if (!plan.dataset_path.empty()) {
        if (!std::filesystem::exists(plan.dataset_path))
            fail("missing_artifact", "dataset '" + plan.dataset_path + "' does not exist");
        full = load_dataset(plan.dataset_path);
        if (full.kb_fingerprint != fingerprint)
            fail("fingerprint_mismatch", "dataset '" + plan.dataset_path +
                                             "' was built from a different knowledge base");
    } else {
        full = simulate_dataset(art.kb, plan.n_cases, plan.stage_seed(kStageData), plan.sim);
    }

    SplitResult split = split_dataset(full, plan.ratios, plan.min_test_per_disease,
                                      plan.stage_seed(kStageSplit));
    art.train_full = std::move(split.train);
    art.val_full = std::move(split.validation);
    art.test_full = std::move(split.test);

    art.train_proj = project_finding_types(art.train_full, plan.train_types, art.kb);
    art.train_proj = resample_balance(art.train_proj, plan.stage_seed(kStageBalance));
    art.val_proj = project_finding_types(art.val_full, plan.train_types, art.kb);
    art.test_proj = project_finding_types(art.test_full, plan.train_types, art.kb);

    art.pool = prevalent_pool(art.kb, std::min<int>(plan.pool_size,
                                                    static_cast<int>(art.kb.findings.size())),
                              plan.train_types);
    art.vocab = build_vocabulary(art.kb);
    art.labels = build_label_map(art.kb);

    auto wants = [&](const std::string& name) {
        return std::find(plan.rankers.begin(), plan.rankers.end(), name) != plan.rankers.end();
    };

    if (wants("bayes")) art.bayes = build_nb_model(art.kb, PriorSource::uniform);

    TrainConfig tc = plan.train;
    tc.seed = plan.stage_seed(kStageTrain);
    if (wants("lr")) {
        EncodedDataset train_enc = encode_dataset(art.vocab, art.labels, art.train_proj, art.kb,
                                                  plan.convnet.seq_len);
        EncodedDataset val_enc = encode_dataset(art.vocab, art.labels, art.val_proj, art.kb,
                                                plan.convnet.seq_len);
        art.lr = lr_train(train_enc, val_enc, tc.lambda, tc);
    }
    ConvNetConfig arch = plan.convnet;
    arch.vocab_size = art.vocab.size();
    arch.n_classes = art.labels.n_classes();
    if (wants("convnet")) {
        TrainConfig clean = tc;
        clean.noise_augment = 0;
        art.convnet = convnet_train_cases(art.train_proj, art.val_proj, art.kb, art.vocab,
                                          art.labels, art.pool, arch, clean)
                          .model;
    }
    if (wants("convnet_noise")) {
        TrainConfig noisy = tc;
        noisy.noise_augment = plan.convnet_noise_augment;
        art.convnet_noise = convnet_train_cases(art.train_proj, art.val_proj, art.kb, art.vocab,
                                                art.labels, art.pool, arch, noisy)
                                .model;
    }
    return art;
}

std::vector<Ranker> plan_rankers(const ExperimentPlan& plan, const ExperimentArtifacts& art) {
    std::vector<Ranker> rankers;
    for (const std::string& name : plan.rankers) {
        if (name == "expert") {
            rankers.push_back(make_expert_ranker(*art.index));
        } else if (name == "bayes") {
            rankers.push_back(make_bayes_ranker(art.bayes));
        } else if (name == "lr") {
            if (!art.lr) fail("config", "plan asks for the lr ranker but no model was trained");
            rankers.push_back(make_lr_ranker(*art.lr, art.vocab, art.labels, *art.index,
                                             plan.convnet.seq_len));
        } else if (name == "convnet") {
            if (!art.convnet) fail("config", "plan asks for the convnet ranker but no model was trained");
            rankers.push_back(make_convnet_ranker(*art.convnet, art.vocab, art.labels, *art.index));
        } else if (name == "convnet_noise") {
            if (!art.convnet_noise)
                fail("config", "plan asks for the convnet_noise ranker but no model was trained");
            rankers.push_back(make_convnet_ranker(*art.convnet_noise, art.vocab, art.labels,
                                                  *art.index, "convnet_noise"));
        } else {
            fail("config", "unknown ranker '" + name + "'");
        }
    }
    return rankers;
}

std::vector<EvalResult> run_ablation(const ExperimentPlan& plan, const ExperimentArtifacts& art,
                                     const std::vector<std::set<FindingType>>& subsets) {
    std::vector<Ranker> rankers = plan_rankers(plan, art);
    std::vector<EvalResult> results;
    const std::string plan_hash = plan.hash();
    for (const auto& subset : subsets) {
        Dataset projected = project_finding_types(art.test_full, subset, art.kb);
        for (const Ranker& ranker : rankers) {
            EvalResult r = evaluate_ranker(ranker, projected, "ablation[" + types_label(subset) + "]");
            r.seed = plan.seed;
            r.plan_hash = plan_hash;
            results.push_back(std::move(r));
        }
    }
    return results;
}

std::vector<EvalResult> run_noise_sweep(const ExperimentPlan& plan, const ExperimentArtifacts& art) {
    std::vector<Ranker> rankers = plan_rankers(plan, art);
    std::vector<EvalResult> results;
    const std::string plan_hash = plan.hash();
    const std::string dataset_label = "test[" + types_label(plan.train_types) + "]";
    std::uint64_t cell = 0;
    for (NoiseMode mode : plan.noise_modes) {
        for (double fraction : plan.noise_fractions) {
            NoiseSpec spec;
            spec.mode = mode;
            spec.fraction = fraction;
            Dataset corrupted = make_noisy_dataset(art.test_proj, spec, art.pool, art.kb,
                                                   plan.stage_seed(kStageNoiseBase + cell));
            ++cell;
            for (const Ranker& ranker : rankers) {
                EvalResult r = evaluate_ranker(ranker, corrupted, dataset_label);
                r.mode = to_string(mode);
                r.fraction = fraction;
                r.seed = plan.seed;
                r.plan_hash = plan_hash;
                results.push_back(std::move(r));
            }
        }
    }
    return results;
}

PipelineResult pipeline_run(const ExperimentPlan& plan) {
    ExperimentArtifacts art = prepare_artifacts(plan);
    std::vector<Ranker> rankers = plan_rankers(plan, art);
    const std::string plan_hash = plan.hash();

    PipelineResult out;
    const std::string dataset_label = "test[" + types_label(plan.train_types) + "]";
    for (const Ranker& ranker : rankers) {
        EvalResult r = evaluate_ranker(ranker, art.test_proj, dataset_label);
        r.seed = plan.seed;
        r.plan_hash = plan_hash;
        out.results.push_back(std::move(r));
    }
    if (!plan.ablation_subsets.empty()) {
        auto rows = run_ablation(plan, art, plan.ablation_subsets);
        out.results.insert(out.results.end(), rows.begin(), rows.end());
    }
    if (!plan.noise_modes.empty() && !plan.noise_fractions.empty()) {
        auto rows = run_noise_sweep(plan, art);
        out.results.insert(out.results.end(), rows.begin(), rows.end());
    }

    write_report(out.results, plan.output_path, plan.format);
    out.written_files.push_back(plan.output_path);
    if (!plan.plot_data_path.empty()) {
        write_plot_data(out.results, plan.plot_data_path);
        out.written_files.push_back(plan.plot_data_path);
    }
    return out;
}

} // namespace ddx
