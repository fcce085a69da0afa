#include "ddx/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "ddx/rng.hpp"
#include "ddx/simulator.hpp"

namespace ddx {

using nlohmann::json;

namespace {

// lowercase, non-alphanumerics to spaces, single-space separation
std::string normalize_name(const std::string& raw) {
    std::string out;
    bool pending_space = false;
    for (char c : raw) {
        char lc = c;
        if (c >= 'A' && c <= 'Z') lc = static_cast<char>(c - 'A' + 'a');
        bool alnum = (lc >= 'a' && lc <= 'z') || (lc >= '0' && lc <= '9');
        if (alnum) {
            if (pending_space && !out.empty()) out += ' ';
            pending_space = false;
            out += lc;
        } else {
            pending_space = true;
        }
    }
    return out;
}

} // namespace

std::vector<ExternalCase> load_external_cases(const std::string& path, bool strict,
                                              std::vector<std::string>* issues) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io", "cannot open external cases file '" + path + "'");
    std::vector<ExternalCase> cases;
    std::string line;
    long long line_no = 0;
    auto report = [&](const std::string& what) {
        std::string msg = path + ":" + std::to_string(line_no) + ": " + what;
        if (strict) fail("parse", msg);
        if (issues) issues->push_back(msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            report(e.what());
            continue;
        }
        ExternalCase c;
        if (!j.contains("disease") || !j.at("disease").is_string() ||
            j.at("disease").get<std::string>().empty()) {
            report("missing disease name");
            continue;
        }
        if (!j.contains("findings") || !j.at("findings").is_array() || j.at("findings").empty()) {
            report("missing findings");
            continue;
        }
        c.disease_name = j.at("disease").get<std::string>();
        bool bad = false;
        for (const auto& f : j.at("findings")) {
            if (!f.is_string()) {
                report("findings must be strings");
                bad = true;
                break;
            }
            c.finding_names.push_back(f.get<std::string>());
        }
        if (bad) continue;
        c.source = j.value("source", "");
        cases.push_back(std::move(c));
    }
    return cases;
}

void save_external_cases(const std::vector<ExternalCase>& cases, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io", "cannot open '" + path + "' for writing");
    for (const auto& c : cases) {
        json j;
        j["findings"] = c.finding_names;
        j["disease"] = c.disease_name;
        j["source"] = c.source;
        out << j.dump() << "\n";
    }
    if (!out) fail("io", "failed writing '" + path + "'");
}

ReconcileResult reconcile(const std::vector<ExternalCase>& external, const KnowledgeBase& kb,
                          NewFindingPolicy policy) {
    ReconcileResult result;
    result.kb = kb;

    std::unordered_map<std::string, int> disease_by_name;
    for (const auto& d : kb.diseases) {
        disease_by_name[normalize_name(d.name)] = d.id;
        for (const auto& a : d.aliases) disease_by_name[normalize_name(a)] = d.id;
    }
    std::unordered_map<std::string, int> finding_by_name;
    for (const auto& f : kb.findings) finding_by_name[normalize_name(f.name)] = f.id;

    int next_disease = 0;
    for (const auto& d : kb.diseases) next_disease = std::max(next_disease, d.id);
    int next_finding = 0;
    for (const auto& f : kb.findings) next_finding = std::max(next_finding, f.id);

    // reject policy: collect every offender before failing
    std::vector<std::string> unknown_findings;
    if (policy == NewFindingPolicy::reject) {
        std::unordered_set<std::string> seen;
        for (const auto& c : external) {
            for (const auto& name : c.finding_names) {
                std::string norm = normalize_name(name);
                if (!finding_by_name.count(norm) && seen.insert(norm).second)
                    unknown_findings.push_back(norm);
            }
        }
        if (!unknown_findings.empty()) {
            std::string msg = "unknown findings under the reject policy:";
            for (const auto& n : unknown_findings) msg += " '" + n + "'";
            fail("unknown_finding", msg);
        }
    }

    long long case_id = 0;
    for (const auto& c : external) {
        std::string disease_norm = normalize_name(c.disease_name);
        if (disease_norm.empty()) fail("parse", "external disease name normalizes to nothing");
        int disease_id;
        auto dit = disease_by_name.find(disease_norm);
        if (dit != disease_by_name.end()) {
            disease_id = dit->second;
        } else {
            disease_id = ++next_disease;
            DiseaseDef d;
            d.id = disease_id;
            d.name = disease_norm;
            result.kb.diseases.push_back(std::move(d));
            disease_by_name[disease_norm] = disease_id;
            result.new_disease_ids.push_back(disease_id);
        }

        Case mapped;
        mapped.id = case_id++;
        mapped.disease_id = disease_id;
        for (const auto& name : c.finding_names) {
            std::string norm = normalize_name(name);
            if (norm.empty()) fail("parse", "external finding name normalizes to nothing");
            auto fit = finding_by_name.find(norm);
            int finding_id;
            if (fit != finding_by_name.end()) {
                finding_id = fit->second;
            } else {
                finding_id = ++next_finding;
                FindingDef f;
                f.id = finding_id;
                f.name = norm;
                f.ftype = FindingType::symptom; // EHR extraction yields symptom text
                f.import = 3;
                result.kb.findings.push_back(std::move(f));
                finding_by_name[norm] = finding_id;
                result.new_finding_ids.push_back(finding_id);
            }
            insert_sorted_unique(mapped.findings_present, finding_id);
        }
        result.cases.push_back(std::move(mapped));
    }
    canonicalize(result.kb);
    return result;
}

MergeResult merge_with_holdout(const Dataset& sim_train, const std::vector<Case>& external,
                               double holdout_fraction, std::uint64_t seed,
                               const std::string& kb_fingerprint) {
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
        fail("config", "holdout fraction must be in [0,1)");

    std::map<int, std::vector<std::size_t>> by_disease;
    for (std::size_t i = 0; i < external.size(); ++i) by_disease[external[i].disease_id].push_back(i);

    MergeResult out;
    out.combined_train = sim_train;
    if (!kb_fingerprint.empty()) out.combined_train.kb_fingerprint = kb_fingerprint;
    out.external_test.kb_fingerprint = out.combined_train.kb_fingerprint;

    long long next_train_id = 0;
    for (const Case& c : sim_train.cases) next_train_id = std::max(next_train_id, c.id + 1);
    long long next_test_id = 0;

    json counts = json::object();
    for (const auto& [disease, idx] : by_disease) {
        auto n = static_cast<long long>(idx.size());
        long long hold = 0;
        if (holdout_fraction > 0.0) {
            if (n < 2)
                fail("insufficient_external", "external disease " + std::to_string(disease) +
                                                  " needs at least 2 cases");
            hold = std::clamp<long long>(std::llround(holdout_fraction * static_cast<double>(n)), 1,
                                         n - 1);
        }
        std::vector<std::size_t> shuffled = idx;
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(disease));
        rng.shuffle(shuffled);
        for (long long i = 0; i < n; ++i) {
            Case c = external[shuffled[static_cast<std::size_t>(i)]];
            if (i < hold) {
                c.id = next_test_id++;
                out.external_test.cases.push_back(std::move(c));
            } else {
                c.id = next_train_id++;
                out.combined_train.cases.push_back(std::move(c));
            }
        }
        counts[std::to_string(disease)] = {{"total", n}, {"held_out", hold}};
    }

    out.combined_train.provenance["external_merge"] = counts;
    out.combined_train.provenance["holdout_fraction"] = holdout_fraction;
    out.external_test.provenance["external_merge"] = counts;
    out.external_test.provenance["holdout_fraction"] = holdout_fraction;
    if (out.external_test.cases.empty()) out.external_test.provenance["warning"] = "empty external test";
    return out;
}

json ExternalGenConfig::to_json() const {
    json j;
    j["n_new_diseases"] = n_new_diseases;
    j["n_alias_diseases"] = n_alias_diseases;
    j["cases_per_disease"] = cases_per_disease;
    j["label_noise"] = label_noise;
    j["new_profile_size"] = new_profile_size;
    j["new_exclusive_findings"] = new_exclusive_findings;
    j["source_tag"] = source_tag;
    return j;
}

ExternalGenConfig ExternalGenConfig::from_json(const json& j) {
    static const std::unordered_set<std::string> allowed = {
        "n_new_diseases", "n_alias_diseases", "cases_per_disease",      "label_noise",
        "new_profile_size", "new_exclusive_findings", "source_tag"};
    if (!j.is_object()) fail("config", "external generator config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) fail("config", "unknown external generator key '" + it.key() + "'");
    }
    ExternalGenConfig c;
    if (j.contains("n_new_diseases")) c.n_new_diseases = j.at("n_new_diseases").get<int>();
    if (j.contains("n_alias_diseases")) c.n_alias_diseases = j.at("n_alias_diseases").get<int>();
    if (j.contains("cases_per_disease")) c.cases_per_disease = j.at("cases_per_disease").get<int>();
    if (j.contains("label_noise")) c.label_noise = j.at("label_noise").get<double>();
    if (j.contains("new_profile_size")) c.new_profile_size = j.at("new_profile_size").get<int>();
    if (j.contains("new_exclusive_findings"))
        c.new_exclusive_findings = j.at("new_exclusive_findings").get<int>();
    if (j.contains("source_tag")) c.source_tag = j.at("source_tag").get<std::string>();
    return c;
}

namespace {

const std::vector<std::string> kExtSyllables = {"gra", "hem", "neo", "pra", "sub", "dur",
                                                "car", "pul", "ren", "ost", "myo", "derm"};

std::string fresh_ext_word(Rng& rng, std::unordered_set<std::string>& used) {
    for (;;) {
        std::string w;
        int n = rng.int_in(2, 3);
        for (int i = 0; i < n; ++i) w += kExtSyllables[rng.below(kExtSyllables.size())];
        if (used.insert(w).second) return w;
    }
}

} // namespace

std::vector<ExternalCase> make_external_cases(const KnowledgeBase& kb,
                                              const ExternalGenConfig& config, std::uint64_t seed) {
    if (config.n_new_diseases < 0 || config.n_alias_diseases < 0 || config.cases_per_disease < 1)
        fail("config", "external generator counts must be positive");
    if (config.n_new_diseases + config.n_alias_diseases < 1)
        fail("config", "external generator needs at least one disease");
    if (!(config.label_noise >= 0.0 && config.label_noise <= 1.0))
        fail("config", "label_noise must be in [0,1]");
    if (config.new_exclusive_findings > config.new_profile_size)
        fail("config", "new_exclusive_findings cannot exceed new_profile_size");
    if (config.n_alias_diseases > static_cast<int>(kb.diseases.size()))
        fail("config", "not enough knowledge-base diseases to reference");

    KbIndex index(kb);
    Rng rng = Rng::derive(seed, 0xE417);

    std::unordered_set<std::string> used_names;
    for (const auto& d : kb.diseases) {
        used_names.insert(normalize_name(d.name));
        for (const auto& a : d.aliases) used_names.insert(normalize_name(a));
    }
    for (const auto& f : kb.findings) used_names.insert(normalize_name(f.name));

    struct ExtDisease {
        std::string name;                         // as written in the external source
        std::optional<int> kb_disease;            // set for alias-referenced diseases
        std::vector<std::pair<std::string, int>> profile; // (finding name, frequency score)
    };
    std::vector<ExtDisease> diseases;

    // Existing diseases referred to by alias where one exists.
    int taken = 0;
    for (const auto& d : kb.diseases) {
        if (taken == config.n_alias_diseases) break;
        if (d.aliases.empty()) continue;
        diseases.push_back({d.aliases.front(), d.id, {}});
        ++taken;
    }
    for (const auto& d : kb.diseases) {
        if (taken == config.n_alias_diseases) break;
        bool already = false;
        for (const auto& e : diseases) already = already || (e.kb_disease && *e.kb_disease == d.id);
        if (already) continue;
        diseases.push_back({d.name, d.id, {}});
        ++taken;
    }

    // Brand-new diseases with partially invented profiles.
    for (int i = 0; i < config.n_new_diseases; ++i) {
        ExtDisease d;
        d.name = fresh_ext_word(rng, used_names) + " " + (i % 2 == 0 ? "prematurity" : "hematoma");
        int n_existing = config.new_profile_size - config.new_exclusive_findings;
        for (int e = 0; e < config.new_exclusive_findings; ++e)
            d.profile.push_back({fresh_ext_word(rng, used_names), rng.int_in(3, 5)});
        for (std::size_t pos :
             rng.sample_without_replacement(kb.findings.size(), static_cast<std::size_t>(std::min(
                                                                    n_existing, static_cast<int>(kb.findings.size())))))
            d.profile.push_back({kb.findings[pos].name, rng.int_in(2, 5)});
        diseases.push_back(std::move(d));
    }

    InclusionMap p_incl;
    std::vector<ExternalCase> cases;
    for (const auto& d : diseases) {
        for (int i = 0; i < config.cases_per_disease; ++i) {
            ExternalCase c;
            c.disease_name = d.name;
            c.source = config.source_tag;
            if (d.kb_disease) {
                Case sim = simulate_case(index, *d.kb_disease, rng);
                for (int f : sim.findings_present) c.finding_names.push_back(index.finding(f).name);
            } else {
                for (const auto& [name, freq] : d.profile) {
                    if (rng.bernoulli(p_incl(freq))) c.finding_names.push_back(name);
                }
                if (c.finding_names.empty()) c.finding_names.push_back(d.profile.front().first);
            }
            cases.push_back(std::move(c));
        }
    }

    // Label noise: reassign among the other external diseases.
    if (config.label_noise > 0.0 && diseases.size() > 1) {
        for (auto& c : cases) {
            if (!rng.bernoulli(config.label_noise)) continue;
            for (;;) {
                const auto& pick = diseases[rng.below(diseases.size())];
                if (pick.name != c.disease_name) {
                    c.disease_name = pick.name;
                    break;
                }
            }
        }
    }
    return cases;
}

} // namespace ddx
