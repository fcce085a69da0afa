#include "ddx/kb_generate.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ddx/rng.hpp"

namespace ddx {

using nlohmann::json;

namespace {

const std::array<FindingType, kNumFindingTypes> kTypes = {
    FindingType::history, FindingType::symptom, FindingType::sign,
    FindingType::lab, FindingType::demographic};

const std::vector<std::string> kQualifiers = {
    "mild", "severe", "acute", "chronic", "left",      "right",
    "focal", "diffuse", "recent", "persistent", "elevated", "reduced"};

const std::vector<std::string> kDiseaseSuffixes = {"syndrome", "disease", "disorder", "deficiency"};

const std::vector<std::string> kSyllables = {
    "ba", "be", "bi", "bo", "bu", "da", "de", "di", "do", "du", "ka", "ke", "ki",
    "ko", "ku", "la", "le", "li", "lo", "lu", "ma", "me", "mi", "mo", "mu", "na",
    "ne", "ni", "no", "nu", "ra", "re", "ri", "ro", "ru", "sa", "se", "si", "so",
    "su", "ta", "te", "ti", "to", "tu", "va", "ve", "vi", "vo", "vu"};

std::string fresh_word(Rng& rng, std::unordered_set<std::string>& used) {
    for (;;) {
        int n = rng.int_in(2, 4);
        std::string w;
        for (int i = 0; i < n; ++i) w += kSyllables[rng.below(kSyllables.size())];
        if (used.insert(w).second) return w;
    }
}

int draw_score(Rng& rng, const std::array<double, 5>& weights) {
    std::vector<double> w(weights.begin(), weights.end());
    return static_cast<int>(rng.weighted_pick(w)) + 1;
}

bool positive_sum(const std::array<double, 5>& w) {
    double s = 0.0;
    for (double x : w) {
        if (x < 0.0) return false;
        s += x;
    }
    return s > 0.0;
}

} // namespace

void check_feasible(const KbGenConfig& c) {
    auto bad = [](const std::string& why) { fail("infeasible_config", why); };
    if (c.n_diseases < 1) bad("n_diseases must be >= 1");
    int min_total = 0;
    for (int t = 0; t < kNumFindingTypes; ++t) {
        if (c.finding_counts[t] < 0) bad("finding counts must be non-negative");
        if (c.profile_min[t] < 0 || c.profile_max[t] < c.profile_min[t])
            bad("profile size range must satisfy 0 <= min <= max");
        if (c.profile_max[t] > c.finding_counts[t])
            bad(std::string("profile size exceeds the ") + to_string(kTypes[t]) + " finding pool");
        min_total += c.profile_min[t];
    }
    if (min_total < 3) bad("profile minimums must give each disease at least 3 links");
    if (!(c.exclusive_fraction >= 0.0 && c.exclusive_fraction <= 1.0))
        bad("exclusive_fraction must be in [0,1]");
    if (!positive_sum(c.evoking_weights_shared) || !positive_sum(c.evoking_weights_exclusive) ||
        !positive_sum(c.frequency_weights) || !positive_sum(c.import_weights_shared) ||
        !positive_sum(c.import_weights_exclusive))
        bad("score weights must be non-negative with positive sum");
    if (c.exclusion_groups < 0 || c.cooccurrence_pairs < 0) bad("structure counts must be >= 0");
    if (c.exclusion_groups > 0 && c.exclusion_group_size < 2)
        bad("exclusion groups need at least 2 members");
    if (!(c.cooccurrence_strength_min > 0.0 && c.cooccurrence_strength_max <= 1.0 &&
          c.cooccurrence_strength_min <= c.cooccurrence_strength_max))
        bad("cooccurrence strength range must sit inside (0,1]");
    for (double p : {c.predisposing_fraction, c.history_link_prob, c.alias_prob}) {
        if (!(p >= 0.0 && p <= 1.0)) bad("probabilities must be in [0,1]");
    }
}

KnowledgeBase generate_synthetic_kb(const KbGenConfig& config, std::uint64_t seed) {
    check_feasible(config);
    Rng rng = Rng::derive(seed, 0);
    std::unordered_set<std::string> used_words(kQualifiers.begin(), kQualifiers.end());
    for (const auto& s : kDiseaseSuffixes) used_words.insert(s);

    KnowledgeBase kb;

    // Findings, type by type. The first reserve[t] findings of each type form
    // the disease-private region; finding r of the region belongs to disease
    // index (r % n_diseases).
    std::array<int, kNumFindingTypes> reserve{};
    for (int t = 0; t < kNumFindingTypes; ++t) {
        int cap = static_cast<int>(std::ceil(config.exclusive_fraction * config.profile_max[t]));
        long long want = static_cast<long long>(config.n_diseases) * cap;
        long long shared_floor = config.finding_counts[t] - config.profile_max[t];
        reserve[t] = static_cast<int>(std::max(0LL, std::min<long long>(want, shared_floor)));
    }

    std::array<std::vector<int>, kNumFindingTypes> exclusive_ids; // region, creation order
    std::array<std::vector<int>, kNumFindingTypes> shared_ids;
    int next_finding_id = 1;
    for (int t = 0; t < kNumFindingTypes; ++t) {
        for (int i = 0; i < config.finding_counts[t]; ++i) {
            bool exclusive = i < reserve[t];
            FindingDef f;
            f.id = next_finding_id++;
            f.name = fresh_word(rng, used_words);
            if (rng.bernoulli(0.5)) f.name += " " + kQualifiers[rng.below(kQualifiers.size())];
            f.ftype = kTypes[t];
            f.import = draw_score(rng, exclusive ? config.import_weights_exclusive
                                                 : config.import_weights_shared);
            (exclusive ? exclusive_ids[t] : shared_ids[t]).push_back(f.id);
            kb.findings.push_back(std::move(f));
        }
    }

    for (int d = 0; d < config.n_diseases; ++d) {
        DiseaseDef dd;
        dd.id = d + 1;
        const std::string& suffix = kDiseaseSuffixes[rng.below(kDiseaseSuffixes.size())];
        dd.name = fresh_word(rng, used_words) + " " + suffix;
        if (rng.bernoulli(config.alias_prob))
            dd.aliases.push_back(fresh_word(rng, used_words) + " " + suffix);
        if (rng.bernoulli(config.history_link_prob)) dd.history_link_frequency = rng.int_in(1, 5);
        kb.diseases.push_back(std::move(dd));
    }

    // Profiles.
    for (int d = 0; d < config.n_diseases; ++d) {
        int disease_id = d + 1;
        for (int t = 0; t < kNumFindingTypes; ++t) {
            if (config.profile_max[t] == 0) continue;
            int n_links = rng.int_in(config.profile_min[t], config.profile_max[t]);
            if (n_links == 0) continue;

            std::vector<int> own;
            for (std::size_t r = static_cast<std::size_t>(d); r < exclusive_ids[t].size();
                 r += static_cast<std::size_t>(config.n_diseases))
                own.push_back(exclusive_ids[t][r]);

            int n_excl = std::min<int>(static_cast<int>(std::llround(config.exclusive_fraction * n_links)),
                                       static_cast<int>(own.size()));
            int n_shared = std::min<int>(n_links - n_excl, static_cast<int>(shared_ids[t].size()));

            auto add_link = [&](int finding_id, bool exclusive) {
                Link l;
                l.disease_id = disease_id;
                l.finding_id = finding_id;
                l.evoking_strength = draw_score(rng, exclusive ? config.evoking_weights_exclusive
                                                               : config.evoking_weights_shared);
                l.frequency = draw_score(rng, config.frequency_weights);
                kb.links.push_back(l);
            };
            for (std::size_t i : rng.sample_without_replacement(own.size(), static_cast<std::size_t>(n_excl)))
                add_link(own[i], true);
            for (std::size_t i :
                 rng.sample_without_replacement(shared_ids[t].size(), static_cast<std::size_t>(n_shared)))
                add_link(shared_ids[t][i], false);
        }
    }

    KbIndex index_for_structure(kb); // profiles only; built before exclusions/cooccurrences exist

    // Exclusion groups: members of one disease's profile, disjoint across groups.
    std::unordered_set<int> in_exclusion;
    for (int g = 0; g < config.exclusion_groups; ++g) {
        bool placed = false;
        for (int attempt = 0; attempt < config.n_diseases && !placed; ++attempt) {
            int d = rng.int_in(1, config.n_diseases);
            std::vector<int> pool;
            for (const Link& l : index_for_structure.profile(d)) {
                if (index_for_structure.finding(l.finding_id).ftype != FindingType::demographic &&
                    !in_exclusion.count(l.finding_id))
                    pool.push_back(l.finding_id);
            }
            if (static_cast<int>(pool.size()) < config.exclusion_group_size) continue;
            ExclusionGroup group;
            for (std::size_t i : rng.sample_without_replacement(
                     pool.size(), static_cast<std::size_t>(config.exclusion_group_size)))
                group.finding_ids.push_back(pool[i]);
            for (int id : group.finding_ids) in_exclusion.insert(id);
            kb.exclusions.push_back(std::move(group));
            placed = true;
        }
    }

    // Co-occurrence pairs inside one profile, skipping excluded findings.
    std::unordered_set<long long> cooccur_seen;
    for (int p = 0; p < config.cooccurrence_pairs; ++p) {
        for (int attempt = 0; attempt < 4 * config.n_diseases; ++attempt) {
            int d = rng.int_in(1, config.n_diseases);
            std::vector<int> pool;
            for (const Link& l : index_for_structure.profile(d)) {
                if (index_for_structure.finding(l.finding_id).ftype != FindingType::demographic &&
                    !in_exclusion.count(l.finding_id))
                    pool.push_back(l.finding_id);
            }
            if (pool.size() < 2) continue;
            auto pick = rng.sample_without_replacement(pool.size(), 2);
            int a = std::min(pool[pick[0]], pool[pick[1]]);
            int b = std::max(pool[pick[0]], pool[pick[1]]);
            long long key = (static_cast<long long>(a) << 32) | static_cast<unsigned>(b);
            if (!cooccur_seen.insert(key).second) continue;
            CoOccurrencePair pair;
            pair.finding_a = a;
            pair.finding_b = b;
            pair.strength = rng.uniform(config.cooccurrence_strength_min, config.cooccurrence_strength_max);
            kb.cooccurrences.push_back(pair);
            break;
        }
    }

    // Predisposing flags on history links.
    for (const Link& l : kb.links) {
        if (index_for_structure.finding(l.finding_id).ftype == FindingType::history &&
            rng.bernoulli(config.predisposing_fraction))
            kb.predisposing.emplace_back(l.disease_id, l.finding_id);
    }

    canonicalize(kb);
    return kb;
}

json kbgen_config_to_json(const KbGenConfig& c) {
    json counts, pmin, pmax;
    for (int t = 0; t < kNumFindingTypes; ++t) {
        const char* name = to_string(kTypes[t]);
        counts[name] = c.finding_counts[t];
        pmin[name] = c.profile_min[t];
        pmax[name] = c.profile_max[t];
    }
    json j;
    j["n_diseases"] = c.n_diseases;
    j["finding_counts"] = counts;
    j["profile_min"] = pmin;
    j["profile_max"] = pmax;
    j["exclusive_fraction"] = c.exclusive_fraction;
    j["evoking_weights_shared"] = c.evoking_weights_shared;
    j["evoking_weights_exclusive"] = c.evoking_weights_exclusive;
    j["frequency_weights"] = c.frequency_weights;
    j["import_weights_shared"] = c.import_weights_shared;
    j["import_weights_exclusive"] = c.import_weights_exclusive;
    j["exclusion_groups"] = c.exclusion_groups;
    j["exclusion_group_size"] = c.exclusion_group_size;
    j["cooccurrence_pairs"] = c.cooccurrence_pairs;
    j["cooccurrence_strength_min"] = c.cooccurrence_strength_min;
    j["cooccurrence_strength_max"] = c.cooccurrence_strength_max;
    j["predisposing_fraction"] = c.predisposing_fraction;
    j["history_link_prob"] = c.history_link_prob;
    j["alias_prob"] = c.alias_prob;
    return j;
}

namespace {

void read_per_type(const json& j, const char* key, std::array<int, kNumFindingTypes>& out) {
    if (!j.contains(key)) return;
    const json& obj = j.at(key);
    if (!obj.is_object()) fail("config", std::string(key) + " must be an object keyed by finding type");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        FindingType t = finding_type_from_string(it.key());
        if (!it.value().is_number_integer())
            fail("config", std::string(key) + "." + it.key() + " must be an integer");
        out[static_cast<int>(t)] = it.value().get<int>();
    }
}

void read_weights(const json& j, const char* key, std::array<double, 5>& out) {
    if (!j.contains(key)) return;
    const json& arr = j.at(key);
    if (!arr.is_array() || arr.size() != 5)
        fail("config", std::string(key) + " must be an array of 5 weights");
    for (int i = 0; i < 5; ++i) out[static_cast<std::size_t>(i)] = arr[static_cast<std::size_t>(i)].get<double>();
}

} // namespace

KbGenConfig kbgen_config_from_json(const json& j) {
    static const std::unordered_set<std::string> allowed = {
        "n_diseases", "finding_counts", "profile_min", "profile_max", "exclusive_fraction",
        "evoking_weights_shared", "evoking_weights_exclusive", "frequency_weights",
        "import_weights_shared", "import_weights_exclusive", "exclusion_groups",
        "exclusion_group_size", "cooccurrence_pairs", "cooccurrence_strength_min",
        "cooccurrence_strength_max", "predisposing_fraction", "history_link_prob", "alias_prob"};
    if (!j.is_object()) fail("config", "kb generator config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) fail("config", "unknown kb generator config key '" + it.key() + "'");
    }
    KbGenConfig c;
    if (j.contains("n_diseases")) c.n_diseases = j.at("n_diseases").get<int>();
    read_per_type(j, "finding_counts", c.finding_counts);
    read_per_type(j, "profile_min", c.profile_min);
    read_per_type(j, "profile_max", c.profile_max);
    if (j.contains("exclusive_fraction")) c.exclusive_fraction = j.at("exclusive_fraction").get<double>();
    read_weights(j, "evoking_weights_shared", c.evoking_weights_shared);
    read_weights(j, "evoking_weights_exclusive", c.evoking_weights_exclusive);
    read_weights(j, "frequency_weights", c.frequency_weights);
    read_weights(j, "import_weights_shared", c.import_weights_shared);
    read_weights(j, "import_weights_exclusive", c.import_weights_exclusive);
    if (j.contains("exclusion_groups")) c.exclusion_groups = j.at("exclusion_groups").get<int>();
    if (j.contains("exclusion_group_size")) c.exclusion_group_size = j.at("exclusion_group_size").get<int>();
    if (j.contains("cooccurrence_pairs")) c.cooccurrence_pairs = j.at("cooccurrence_pairs").get<int>();
    if (j.contains("cooccurrence_strength_min"))
        c.cooccurrence_strength_min = j.at("cooccurrence_strength_min").get<double>();
    if (j.contains("cooccurrence_strength_max"))
        c.cooccurrence_strength_max = j.at("cooccurrence_strength_max").get<double>();
    if (j.contains("predisposing_fraction"))
        c.predisposing_fraction = j.at("predisposing_fraction").get<double>();
    if (j.contains("history_link_prob")) c.history_link_prob = j.at("history_link_prob").get<double>();
    if (j.contains("alias_prob")) c.alias_prob = j.at("alias_prob").get<double>();
    return c;
}

} // namespace ddx
