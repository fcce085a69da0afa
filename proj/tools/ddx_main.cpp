// ddx: differential-diagnosis workbench CLI.
//
// Subcommands cover the full pipeline: kb-gen, simulate, noise, split, train,
// rank, evaluate, sweep, ingest, pipeline. Exit codes: 0 success, 1 domain
// error, 2 usage error. All randomness flows from --seed; DDX_THREADS caps
// worker count (speed only, never bytes).

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ddx/eval.hpp"
#include "ddx/experiment.hpp"
#include "ddx/ingest.hpp"
#include "ddx/kb_generate.hpp"
#include "ddx/ml/gradient_check.hpp"
#include "ddx/ml/model_io.hpp"
#include "ddx/simulator.hpp"
#include "ddx/version.hpp"

using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) ddx::fail("missing_artifact", "cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return json::parse(buf.str());
    } catch (const json::exception& e) {
        ddx::fail("parse", "config file '" + path + "': " + e.what());
    }
}

void write_meta_sidecar(const std::string& path, const std::string& command, const json& effective) {
    json meta;
    meta["tool"] = ddx::kToolVersion;
    meta["command"] = command;
    meta["effective_config"] = effective;
    std::ofstream out(path + ".meta.json", std::ios::binary);
    if (!out) ddx::fail("io", "cannot open '" + path + ".meta.json' for writing");
    out << meta.dump(2) << "\n";
}

void check_fingerprint(const ddx::Dataset& ds, const ddx::KnowledgeBase& kb, const std::string& what) {
    if (!ds.kb_fingerprint.empty() && ds.kb_fingerprint != ddx::kb_fingerprint(kb))
        ddx::fail("fingerprint_mismatch", what + " was built from a different knowledge base");
}

struct KbGenArgs {
    std::string config_path, out_path;
    std::uint64_t seed = 42;
    int diseases = -1;
};

int run_kb_gen(const KbGenArgs& a) {
    ddx::KbGenConfig config;
    if (!a.config_path.empty()) config = ddx::kbgen_config_from_json(load_json_file(a.config_path));
    if (a.diseases >= 0) config.n_diseases = a.diseases;
    ddx::KnowledgeBase kb = ddx::generate_synthetic_kb(config, a.seed);
    ddx::save_kb(kb, a.out_path);
    json effective = ddx::kbgen_config_to_json(config);
    effective["seed"] = a.seed;
    effective["fingerprint"] = ddx::kb_fingerprint(kb);
    write_meta_sidecar(a.out_path, "kb-gen", effective);
    std::cout << "wrote " << a.out_path << " (" << kb.diseases.size() << " diseases, "
              << kb.findings.size() << " findings)\n";
    return 0;
}

struct SimulateArgs {
    std::string kb_path, out_path, config_path;
    long long n_cases = 1000;
    std::uint64_t seed = 1;
};

int run_simulate(const SimulateArgs& a) {
    ddx::KnowledgeBase kb = ddx::load_kb(a.kb_path);
    ddx::SimConfig config;
    if (!a.config_path.empty()) config = ddx::SimConfig::from_json(load_json_file(a.config_path));
    ddx::Dataset ds = ddx::simulate_dataset(kb, a.n_cases, a.seed, config);
    ddx::save_dataset(ds, a.out_path);
    std::cout << "wrote " << a.out_path << " (" << ds.cases.size() << " cases)\n";
    return 0;
}

struct NoiseArgs {
    std::string kb_path, cases_path, out_path, mode = "prevalent_add";
    double fraction = 0.3;
    int k_min = 1, k_max = 5, pool_size = 30;
    std::uint64_t seed = 1;
};

int run_noise(const NoiseArgs& a) {
    ddx::KnowledgeBase kb = ddx::load_kb(a.kb_path);
    ddx::Dataset ds = ddx::load_dataset(a.cases_path);
    check_fingerprint(ds, kb, "'" + a.cases_path + "'");
    ddx::NoiseSpec spec;
    spec.mode = ddx::noise_mode_from_string(a.mode);
    spec.fraction = a.fraction;
    spec.k_min = a.k_min;
    spec.k_max = a.k_max;
    std::vector<int> pool = ddx::prevalent_pool(kb, a.pool_size);
    ddx::Dataset noisy = ddx::make_noisy_dataset(ds, spec, pool, kb, a.seed);
    ddx::save_dataset(noisy, a.out_path);
    std::cout << "wrote " << a.out_path << " (" << noisy.provenance["corrupted"] << " corrupted)\n";
    return 0;
}

struct SplitArgs {
    std::string cases_path, out_prefix;
    std::string ratios = "8:1:1";
    int min_test = 0;
    std::uint64_t seed = 1;
};

int run_split(const SplitArgs& a) {
    ddx::Dataset ds = ddx::load_dataset(a.cases_path);
    ddx::SplitRatios ratios;
    if (std::sscanf(a.ratios.c_str(), "%lf:%lf:%lf", &ratios.train, &ratios.validation,
                    &ratios.test) != 3)
        ddx::fail("config", "ratios must look like 8:1:1");
    ddx::SplitResult split = ddx::split_dataset(ds, ratios, a.min_test, a.seed);
    ddx::save_dataset(split.train, a.out_prefix + ".train.jsonl");
    ddx::save_dataset(split.validation, a.out_prefix + ".val.jsonl");
    ddx::save_dataset(split.test, a.out_prefix + ".test.jsonl");
    std::cout << "wrote " << a.out_prefix << ".{train,val,test}.jsonl (" << split.train.cases.size()
              << "/" << split.validation.cases.size() << "/" << split.test.cases.size() << ")\n";
    return 0;
}

struct TrainArgs {
    std::string model = "lr";
    std::string kb_path, train_path, val_path, out_path, config_path, arch_path;
    int noise_augment = -1;
    int pool_size = 30;
    int seq_len = -1;
    bool no_balance = false;
    std::uint64_t seed = 1;
};

int run_train(const TrainArgs& a) {
    ddx::KnowledgeBase kb = ddx::load_kb(a.kb_path);
    ddx::Dataset train = ddx::load_dataset(a.train_path);
    ddx::Dataset val = ddx::load_dataset(a.val_path);
    check_fingerprint(train, kb, "training set");
    check_fingerprint(val, kb, "validation set");

    ddx::TrainConfig config;
    if (!a.config_path.empty()) config = ddx::TrainConfig::from_json(load_json_file(a.config_path));
    config.seed = a.seed;
    if (a.noise_augment >= 0) config.noise_augment = a.noise_augment;

    if (!a.no_balance) train = ddx::resample_balance(train, ddx::derive_seed(a.seed, 0xBA1));

    ddx::Vocabulary vocab = ddx::build_vocabulary(kb);
    ddx::LabelMap labels = ddx::build_label_map(kb);

    json effective;
    effective["train_config"] = config.to_json();
    effective["kb_fingerprint"] = ddx::kb_fingerprint(kb);
    effective["balanced"] = !a.no_balance;

    if (a.model == "lr") {
        int seq_len = a.seq_len > 0 ? a.seq_len : 200;
        ddx::EncodedDataset train_enc = ddx::encode_dataset(vocab, labels, train, kb, seq_len);
        ddx::EncodedDataset val_enc = ddx::encode_dataset(vocab, labels, val, kb, seq_len);
        ddx::TrainReport report;
        ddx::LRModel model = ddx::lr_train(train_enc, val_enc, config.lambda, config, &report);
        effective["best_val_top1"] = report.best_val_top1;
        ddx::save_lr_model(model, a.out_path, effective);
        write_meta_sidecar(a.out_path, "train", effective);
        std::cout << "wrote " << a.out_path << " (best val top-1 " << report.best_val_top1 << ")\n";
        return 0;
    }
    if (a.model != "convnet") ddx::fail("config", "unknown model '" + a.model + "'");

    ddx::ConvNetConfig arch;
    if (!a.arch_path.empty()) arch = ddx::ConvNetConfig::from_json(load_json_file(a.arch_path));
    if (a.seq_len > 0) arch.seq_len = a.seq_len;
    arch.vocab_size = vocab.size();
    arch.n_classes = labels.n_classes();
    std::vector<int> pool;
    if (config.noise_augment > 0) pool = ddx::prevalent_pool(kb, a.pool_size);
    ddx::ConvTrainResult result =
        ddx::convnet_train_cases(train, val, kb, vocab, labels, pool, arch, config);
    effective["arch"] = arch.to_json();
    effective["best_val_top1"] = result.report.best_val_top1;
    ddx::save_convnet_model(result.model, a.out_path, effective);
    write_meta_sidecar(a.out_path, "train", effective);
    std::cout << "wrote " << a.out_path << " (best val top-1 " << result.report.best_val_top1
              << ")\n";
    return 0;
}

struct RankArgs {
    std::string kb_path, cases_path, method = "expert", model_path, out_path;
    std::string bayes_mode = "positive_only";
    int topk = 3;
};

int run_rank(const RankArgs& a) {
    ddx::KnowledgeBase kb = ddx::load_kb(a.kb_path);
    ddx::KbIndex index(kb);
    ddx::Dataset ds = ddx::load_dataset(a.cases_path);
    check_fingerprint(ds, kb, "'" + a.cases_path + "'");
    if (a.topk < 1) ddx::fail("config", "--topk must be >= 1");

    ddx::Vocabulary vocab;
    ddx::LabelMap labels;
    std::optional<ddx::LRModel> lr;
    std::optional<ddx::ConvNet> convnet;
    ddx::CondProbTable bayes;
    if (a.method == "bayes") {
        bayes = ddx::build_nb_model(kb, ddx::PriorSource::uniform,
                                    ddx::nb_mode_from_string(a.bayes_mode));
    } else if (a.method == "lr" || a.method == "convnet") {
        if (a.model_path.empty()) ddx::fail("config", "--model is required for learned rankers");
        vocab = ddx::build_vocabulary(kb);
        labels = ddx::build_label_map(kb);
        if (a.method == "lr") lr = ddx::load_lr_model(a.model_path);
        else convnet = ddx::load_convnet_model(a.model_path);
    } else if (a.method != "expert") {
        ddx::fail("config", "unknown method '" + a.method + "'");
    }

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!a.out_path.empty()) {
        file.open(a.out_path, std::ios::binary);
        if (!file) ddx::fail("io", "cannot open '" + a.out_path + "' for writing");
        out = &file;
    }

    for (const ddx::Case& c : ds.cases) {
        ddx::RankedDifferential ranked;
        std::vector<ddx::ExpertScore> breakdown;
        if (a.method == "expert") {
            breakdown = ddx::score_all_diseases(index, c);
            ranked = ddx::rank_expert(index, c);
        } else if (a.method == "bayes") {
            ranked = ddx::rank_bayes(bayes, c);
        } else if (a.method == "lr") {
            ranked = ddx::make_lr_ranker(*lr, vocab, labels, index, 200).rank(c);
        } else {
            ranked = ddx::make_convnet_ranker(*convnet, vocab, labels, index).rank(c);
        }
        json line;
        line["id"] = c.id;
        line["label"] = c.disease_id;
        json top = json::array();
        int k = std::min<int>(a.topk, static_cast<int>(ranked.entries.size()));
        for (int i = 0; i < k; ++i) {
            const auto& e = ranked.entries[static_cast<std::size_t>(i)];
            json entry;
            entry["disease"] = e.disease_id;
            entry["score"] = e.score;
            if (a.method == "expert") {
                for (const auto& s : breakdown) {
                    if (s.disease_id == e.disease_id) {
                        entry["positive"] = s.positive;
                        entry["negative_absent"] = s.negative_absent;
                        entry["penalty_unexplained"] = s.penalty_unexplained;
                        entry["history_bonus"] = s.history_bonus;
                        entry["total"] = s.total;
                        break;
                    }
                }
            }
            top.push_back(entry);
        }
        line["topk"] = top;
        (*out) << line.dump() << "\n";
    }
    return 0;
}

struct EvaluateArgs {
    std::string kb_path, cases_path, method = "expert", model_path, out_path, format = "csv";
    std::string bayes_mode = "positive_only";
};

int run_evaluate(const EvaluateArgs& a) {
    ddx::KnowledgeBase kb = ddx::load_kb(a.kb_path);
    ddx::KbIndex index(kb);
    ddx::Dataset ds = ddx::load_dataset(a.cases_path);
    check_fingerprint(ds, kb, "'" + a.cases_path + "'");

    ddx::Vocabulary vocab;
    ddx::LabelMap labels;
    std::optional<ddx::LRModel> lr;
    std::optional<ddx::ConvNet> convnet;
    ddx::CondProbTable bayes;
    ddx::Ranker ranker;
    if (a.method == "expert") {
        ranker = ddx::make_expert_ranker(index);
    } else if (a.method == "bayes") {
        bayes = ddx::build_nb_model(kb, ddx::PriorSource::uniform,
                                    ddx::nb_mode_from_string(a.bayes_mode));
        ranker = ddx::make_bayes_ranker(bayes);
    } else if (a.method == "lr" || a.method == "convnet") {
        if (a.model_path.empty()) ddx::fail("config", "--model is required for learned rankers");
        vocab = ddx::build_vocabulary(kb);
        labels = ddx::build_label_map(kb);
        if (a.method == "lr") {
            lr = ddx::load_lr_model(a.model_path);
            ranker = ddx::make_lr_ranker(*lr, vocab, labels, index, 200);
        } else {
            convnet = ddx::load_convnet_model(a.model_path);
            ranker = ddx::make_convnet_ranker(*convnet, vocab, labels, index);
        }
    } else {
        ddx::fail("config", "unknown method '" + a.method + "'");
    }

    ddx::EvalResult result = ddx::evaluate_ranker(ranker, ds, a.cases_path);
    std::cout << result.ranker << " top-1 " << result.top1() << " top-3 " << result.top3() << " on "
              << result.n_cases << " cases\n";
    if (!a.out_path.empty()) {
        ddx::write_report({result}, a.out_path, a.format);
        write_meta_sidecar(a.out_path, "evaluate", json{{"method", a.method}});
    }
    return 0;
}

int run_sweep(const std::string& plan_path) {
    ddx::ExperimentPlan plan = ddx::ExperimentPlan::load(plan_path);
    if (plan.noise_modes.empty() || plan.noise_fractions.empty())
        ddx::fail("config", "sweep needs noise_modes and noise_fractions in the plan");
    ddx::ExperimentArtifacts art = ddx::prepare_artifacts(plan);
    std::vector<ddx::EvalResult> results = ddx::run_noise_sweep(plan, art);
    ddx::write_report(results, plan.output_path, plan.format);
    write_meta_sidecar(plan.output_path, "sweep", plan.to_json());
    if (!plan.plot_data_path.empty()) ddx::write_plot_data(results, plan.plot_data_path);
    std::cout << "wrote " << plan.output_path << " (" << results.size() << " results)\n";
    return 0;
}

int run_pipeline(const std::string& plan_path) {
    ddx::ExperimentPlan plan = ddx::ExperimentPlan::load(plan_path);
    ddx::PipelineResult result = ddx::pipeline_run(plan);
    write_meta_sidecar(plan.output_path, "pipeline", plan.to_json());
    for (const auto& f : result.written_files) std::cout << "wrote " << f << "\n";
    return 0;
}

struct IngestArgs {
    std::string kb_path, external_path, train_path, out_prefix, config_path;
    std::string policy = "create";
    bool generate = false;
    bool strict = false;
    double holdout = 0.1;
    std::uint64_t seed = 1;
};

int run_ingest(const IngestArgs& a) {
    ddx::KnowledgeBase kb = ddx::load_kb(a.kb_path);
    if (a.generate) {
        ddx::ExternalGenConfig config;
        if (!a.config_path.empty())
            config = ddx::ExternalGenConfig::from_json(load_json_file(a.config_path));
        std::vector<ddx::ExternalCase> cases = ddx::make_external_cases(kb, config, a.seed);
        ddx::save_external_cases(cases, a.external_path);
        json effective = config.to_json();
        effective["seed"] = a.seed;
        write_meta_sidecar(a.external_path, "ingest", effective);
        std::cout << "wrote " << a.external_path << " (" << cases.size() << " external cases)\n";
        return 0;
    }

    std::vector<std::string> issues;
    std::vector<ddx::ExternalCase> external = ddx::load_external_cases(a.external_path, a.strict, &issues);
    for (const auto& i : issues) std::cerr << "warning: " << i << "\n";
    if (external.empty()) std::cerr << "warning: no external cases loaded\n";

    ddx::NewFindingPolicy policy = a.policy == "reject" ? ddx::NewFindingPolicy::reject
                                                        : ddx::NewFindingPolicy::create;
    ddx::ReconcileResult rec = ddx::reconcile(external, kb, policy);
    ddx::Dataset train = ddx::load_dataset(a.train_path);
    check_fingerprint(train, kb, "training set");
    ddx::MergeResult merged = ddx::merge_with_holdout(train, rec.cases, a.holdout, a.seed,
                                                      ddx::kb_fingerprint(rec.kb));

    ddx::save_kb(rec.kb, a.out_prefix + ".kb.json");
    ddx::save_dataset(merged.combined_train, a.out_prefix + ".train.jsonl");
    ddx::save_dataset(merged.external_test, a.out_prefix + ".test.jsonl");
    json effective;
    effective["policy"] = a.policy;
    effective["holdout"] = a.holdout;
    effective["seed"] = a.seed;
    effective["new_diseases"] = rec.new_disease_ids;
    effective["new_findings"] = static_cast<long long>(rec.new_finding_ids.size());
    write_meta_sidecar(a.out_prefix + ".kb.json", "ingest", effective);
    std::cout << "wrote " << a.out_prefix << ".{kb.json,train.jsonl,test.jsonl}; "
              << rec.new_disease_ids.size() << " new diseases\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"differential-diagnosis workbench"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ddx::kToolVersion);

    KbGenArgs kbgen;
    auto* cmd_kbgen = app.add_subcommand("kb-gen", "generate a synthetic knowledge base");
    cmd_kbgen->add_option("--config", kbgen.config_path, "generator config JSON");
    cmd_kbgen->add_option("--seed", kbgen.seed, "generator seed");
    cmd_kbgen->add_option("--diseases", kbgen.diseases, "override n_diseases");
    cmd_kbgen->add_option("-o,--out", kbgen.out_path, "output KB file")->required();

    SimulateArgs sim;
    auto* cmd_sim = app.add_subcommand("simulate", "simulate labeled cases from a KB");
    cmd_sim->add_option("--kb", sim.kb_path, "knowledge base file")->required();
    cmd_sim->add_option("-n,--cases", sim.n_cases, "number of cases");
    cmd_sim->add_option("--seed", sim.seed, "simulation seed");
    cmd_sim->add_option("--config", sim.config_path, "simulator config JSON");
    cmd_sim->add_option("-o,--out", sim.out_path, "output JSONL")->required();

    NoiseArgs noise;
    auto* cmd_noise = app.add_subcommand("noise", "corrupt a dataset");
    cmd_noise->add_option("--kb", noise.kb_path)->required();
    cmd_noise->add_option("--cases", noise.cases_path)->required();
    cmd_noise->add_option("--mode", noise.mode, "prevalent_add | random_remove");
    cmd_noise->add_option("--fraction", noise.fraction, "share of corrupted cases");
    cmd_noise->add_option("--k-min", noise.k_min);
    cmd_noise->add_option("--k-max", noise.k_max);
    cmd_noise->add_option("--pool-size", noise.pool_size, "prevalent pool size");
    cmd_noise->add_option("--seed", noise.seed);
    cmd_noise->add_option("-o,--out", noise.out_path)->required();

    SplitArgs split;
    auto* cmd_split = app.add_subcommand("split", "train/validation/test split");
    cmd_split->add_option("--cases", split.cases_path)->required();
    cmd_split->add_option("--ratios", split.ratios, "e.g. 8:1:1");
    cmd_split->add_option("--min-test", split.min_test, "per-disease test floor");
    cmd_split->add_option("--seed", split.seed);
    cmd_split->add_option("--out-prefix", split.out_prefix)->required();

    TrainArgs train;
    auto* cmd_train = app.add_subcommand("train", "train a learned ranker");
    cmd_train->add_option("--model", train.model, "lr | convnet")->required();
    cmd_train->add_option("--kb", train.kb_path)->required();
    cmd_train->add_option("--train", train.train_path)->required();
    cmd_train->add_option("--val", train.val_path)->required();
    cmd_train->add_option("--config", train.config_path, "train config JSON");
    cmd_train->add_option("--arch", train.arch_path, "convnet architecture JSON");
    cmd_train->add_option("--noise-augment", train.noise_augment,
                          "prevalent findings injected per case per epoch");
    cmd_train->add_option("--pool-size", train.pool_size);
    cmd_train->add_option("--seq-len", train.seq_len);
    cmd_train->add_flag("--no-balance", train.no_balance, "skip class rebalancing");
    cmd_train->add_option("--seed", train.seed);
    cmd_train->add_option("-o,--out", train.out_path)->required();

    RankArgs rank;
    auto* cmd_rank = app.add_subcommand("rank", "emit per-case ranked differentials");
    cmd_rank->add_option("--kb", rank.kb_path)->required();
    cmd_rank->add_option("--cases", rank.cases_path)->required();
    cmd_rank->add_option("--method", rank.method, "expert | bayes | lr | convnet");
    cmd_rank->add_option("--model", rank.model_path, "model file for lr/convnet");
    cmd_rank->add_option("--bayes-mode", rank.bayes_mode, "positive_only | full_binary");
    cmd_rank->add_option("--topk", rank.topk);
    cmd_rank->add_option("-o,--out", rank.out_path, "output JSONL (default stdout)");

    EvaluateArgs eval;
    auto* cmd_eval = app.add_subcommand("evaluate", "top-k accuracy of one ranker");
    cmd_eval->add_option("--kb", eval.kb_path)->required();
    cmd_eval->add_option("--cases", eval.cases_path)->required();
    cmd_eval->add_option("--method", eval.method);
    cmd_eval->add_option("--model", eval.model_path);
    cmd_eval->add_option("--bayes-mode", eval.bayes_mode);
    cmd_eval->add_option("-o,--out", eval.out_path, "report file");
    cmd_eval->add_option("--format", eval.format, "csv | json");

    std::string sweep_plan, pipeline_plan;
    auto* cmd_sweep = app.add_subcommand("sweep", "noise-robustness sweep from a plan");
    cmd_sweep->add_option("--plan", sweep_plan)->required();
    auto* cmd_pipeline = app.add_subcommand("pipeline", "full dataset->train->evaluate chain");
    cmd_pipeline->add_option("--plan", pipeline_plan)->required();

    IngestArgs ingest;
    auto* cmd_ingest = app.add_subcommand("ingest", "external cases: generate or merge");
    cmd_ingest->add_option("--kb", ingest.kb_path)->required();
    cmd_ingest->add_option("--external", ingest.external_path, "external cases JSONL")->required();
    cmd_ingest->add_flag("--generate", ingest.generate, "write synthetic external cases instead");
    cmd_ingest->add_option("--config", ingest.config_path, "external generator config JSON");
    cmd_ingest->add_option("--train", ingest.train_path, "simulated training set to merge into");
    cmd_ingest->add_option("--policy", ingest.policy, "reject | create");
    cmd_ingest->add_flag("--strict", ingest.strict, "abort on malformed external lines");
    cmd_ingest->add_option("--holdout", ingest.holdout, "per-disease holdout fraction");
    cmd_ingest->add_option("--seed", ingest.seed);
    cmd_ingest->add_option("--out-prefix", ingest.out_prefix);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_kbgen->parsed()) return run_kb_gen(kbgen);
        if (cmd_sim->parsed()) return run_simulate(sim);
        if (cmd_noise->parsed()) return run_noise(noise);
        if (cmd_split->parsed()) return run_split(split);
        if (cmd_train->parsed()) return run_train(train);
        if (cmd_rank->parsed()) return run_rank(rank);
        if (cmd_eval->parsed()) return run_evaluate(eval);
        if (cmd_sweep->parsed()) return run_sweep(sweep_plan);
        if (cmd_pipeline->parsed()) return run_pipeline(pipeline_plan);
        if (cmd_ingest->parsed()) {
            if (!ingest.generate && (ingest.train_path.empty() || ingest.out_prefix.empty()))
                ddx::fail("config", "ingest merge mode needs --train and --out-prefix");
            return run_ingest(ingest);
        }
    } catch (const ddx::Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
