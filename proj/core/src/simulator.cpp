#include "ddx/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "ddx/parallel.hpp"
#include "ddx/points.hpp"
#include "ddx/version.hpp"

namespace ddx {

using nlohmann::json;

json SimConfig::to_json() const {
    json j;
    j["p_incl"] = p_incl.p;
    j["history_prob"] = history_prob;
    return j;
}

SimConfig SimConfig::from_json(const json& j) {
    if (!j.is_object()) fail("config", "simulator config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "p_incl" && it.key() != "history_prob")
            fail("config", "unknown simulator config key '" + it.key() + "'");
    }
    SimConfig c;
    if (j.contains("p_incl")) {
        const json& arr = j.at("p_incl");
        if (!arr.is_array() || arr.size() != 5) fail("config", "p_incl must be an array of 5 probabilities");
        for (int i = 0; i < 5; ++i) {
            double p = arr[static_cast<std::size_t>(i)].get<double>();
            if (!(p >= 0.0 && p <= 1.0)) fail("config", "p_incl entries must be in [0,1]");
            c.p_incl.p[static_cast<std::size_t>(i)] = p;
        }
    }
    if (j.contains("history_prob")) c.history_prob = j.at("history_prob").get<double>();
    return c;
}

namespace {

// Higher frequency first, lower finding id breaking ties.
bool freq_order(const Link& a, const Link& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.finding_id < b.finding_id;
}

} // namespace

Case simulate_case(const KbIndex& index, std::optional<int> disease_id, Rng& rng,
                   const SimConfig& config, SimStats* stats) {
    const auto& disease_ids = index.disease_ids();
    if (disease_ids.empty()) fail("empty_profile", "knowledge base holds no diseases");

    int disease = disease_id ? *disease_id
                             : disease_ids[rng.below(disease_ids.size())];
    if (!index.has_disease(disease)) fail("unknown_disease", "disease id " + std::to_string(disease));

    const std::vector<Link>& profile = index.profile(disease);
    if (profile.empty())
        fail("empty_profile", "disease " + std::to_string(disease) + " has no findings linked");

    std::vector<Link> demographics, predisposing, rest;
    for (const Link& l : profile) {
        if (index.finding(l.finding_id).ftype == FindingType::demographic)
            demographics.push_back(l);
        else if (index.is_predisposing(disease, l.finding_id))
            predisposing.push_back(l);
        else
            rest.push_back(l);
    }
    std::sort(demographics.begin(), demographics.end(), freq_order);
    std::sort(predisposing.begin(), predisposing.end(), freq_order);
    std::sort(rest.begin(), rest.end(), freq_order);

    std::vector<int> included;
    std::unordered_set<int> excluded;

    auto include = [&](int finding_id, std::deque<const Link*>* queue,
                       std::unordered_map<int, double>* promoted,
                       std::unordered_set<int>* pending) {
        insert_sorted_unique(included, finding_id);
        for (int partner : index.exclusion_partners(finding_id)) excluded.insert(partner);
        if (!queue) return;
        // Promote pending co-occurrence partners to the queue front, strongest
        // first; partners keep the best strength seen so far.
        std::vector<std::pair<int, double>> to_front;
        for (const auto& [partner, strength] : index.cooccur_partners(finding_id)) {
            if (pending->count(partner) && !excluded.count(partner)) {
                auto [it, inserted] = promoted->try_emplace(partner, strength);
                if (!inserted) it->second = std::max(it->second, strength);
                to_front.push_back({partner, strength});
            }
        }
        // cooccur_partners is ordered strength desc already; reverse push_front
        // keeps the strongest at the very front.
        for (auto it = to_front.rbegin(); it != to_front.rend(); ++it) {
            const Link* link = index.link(disease, it->first);
            if (link) queue->push_front(link);
        }
    };

    for (const Link& l : demographics) {
        if (excluded.count(l.finding_id)) continue;
        if (rng.bernoulli(config.p_incl(l.frequency))) include(l.finding_id, nullptr, nullptr, nullptr);
    }
    for (const Link& l : predisposing) {
        if (excluded.count(l.finding_id)) continue;
        if (rng.bernoulli(config.p_incl(l.frequency))) include(l.finding_id, nullptr, nullptr, nullptr);
    }

    std::deque<const Link*> queue;
    std::unordered_set<int> pending;
    std::unordered_map<int, double> promoted;
    for (const Link& l : rest) {
        queue.push_back(&l);
        pending.insert(l.finding_id);
    }
    while (!queue.empty()) {
        const Link* l = queue.front();
        queue.pop_front();
        if (!pending.count(l->finding_id)) continue; // already handled via promotion duplicate
        if (excluded.count(l->finding_id)) {
            pending.erase(l->finding_id);
            continue;
        }
        pending.erase(l->finding_id);
        double p = config.p_incl(l->frequency);
        auto it = promoted.find(l->finding_id);
        if (it != promoted.end()) p = std::max(p, it->second);
        if (rng.bernoulli(p)) include(l->finding_id, &queue, &promoted, &pending);
    }

    if (included.empty()) {
        // Empty-case guard: force the highest-frequency finding.
        const Link* best = nullptr;
        for (const Link& l : profile) {
            if (excluded.count(l.finding_id)) continue;
            if (!best || freq_order(l, *best)) best = &l;
        }
        if (!best) fail("empty_profile", "disease " + std::to_string(disease) + " has no includable finding");
        include(best->finding_id, nullptr, nullptr, nullptr);
        if (stats) ++stats->forced_nonempty;
    }

    Case c;
    c.disease_id = disease;
    c.findings_present = std::move(included);
    if (rng.bernoulli(config.history_prob)) c.history_of.push_back(disease);
    return c;
}

Dataset simulate_dataset(const KnowledgeBase& kb, long long n_cases, std::uint64_t seed,
                         const SimConfig& config, std::size_t workers) {
    if (n_cases < 1) fail("empty_request", "n_cases must be >= 1");
    KbIndex index(kb);
    for (int d : index.disease_ids()) {
        if (index.profile(d).empty())
            fail("empty_profile", "disease " + std::to_string(d) + " has no findings linked");
    }

    Dataset ds;
    ds.kb_fingerprint = kb_fingerprint(kb);
    ds.cases.resize(static_cast<std::size_t>(n_cases));
    std::atomic<long long> forced{0};
    parallel_for(static_cast<std::size_t>(n_cases), [&](std::size_t i) {
        Rng rng = Rng::derive(seed, i);
        SimStats stats;
        Case c = simulate_case(index, std::nullopt, rng, config, &stats);
        c.id = static_cast<long long>(i);
        ds.cases[i] = std::move(c);
        if (stats.forced_nonempty) forced += stats.forced_nonempty;
    }, workers);

    ds.provenance["generator"] = "simulate";
    ds.provenance["tool"] = kToolVersion;
    ds.provenance["seed"] = seed;
    ds.provenance["n_cases"] = n_cases;
    ds.provenance["sim_config"] = config.to_json();
    ds.provenance["forced_nonempty"] = forced.load();
    return ds;
}

SplitResult split_dataset(const Dataset& ds, const SplitRatios& ratios, int min_test_per_disease,
                          std::uint64_t seed) {
    if (ds.cases.empty()) fail("empty_request", "cannot split an empty dataset");
    double total = ratios.train + ratios.validation + ratios.test;
    if (!(total > 0.0) || ratios.train < 0 || ratios.validation < 0 || ratios.test < 0)
        fail("config", "split ratios must be non-negative with positive sum");

    std::map<int, std::vector<std::size_t>> by_disease; // ordered for determinism
    for (std::size_t i = 0; i < ds.cases.size(); ++i) by_disease[ds.cases[i].disease_id].push_back(i);

    std::vector<std::size_t> train_idx, val_idx, test_idx;
    std::uint64_t stream = 0;
    for (auto& [disease, idx] : by_disease) {
        Rng rng = Rng::derive(seed, stream++);
        rng.shuffle(idx);
        auto n = static_cast<long long>(idx.size());
        long long n_test = std::max<long long>(min_test_per_disease,
                                               std::llround(n * ratios.test / total));
        long long n_val = std::llround(n * ratios.validation / total);
        if (n_test + n_val > n) {
            fail("insufficient_cases", "disease " + std::to_string(disease) + " has " +
                                           std::to_string(n) + " cases; cannot satisfy the test floor");
        }
        for (long long i = 0; i < n; ++i) {
            if (i < n_test) test_idx.push_back(idx[static_cast<std::size_t>(i)]);
            else if (i < n_test + n_val) val_idx.push_back(idx[static_cast<std::size_t>(i)]);
            else train_idx.push_back(idx[static_cast<std::size_t>(i)]);
        }
    }

    // Replica rule: a test case whose (disease, findings) equals a training
    // case moves to the training side.
    auto key_of = [&](std::size_t i) {
        std::string key = std::to_string(ds.cases[i].disease_id) + ":";
        for (int f : ds.cases[i].findings_present) key += std::to_string(f) + ",";
        return key;
    };
    std::unordered_set<std::string> train_keys;
    for (std::size_t i : train_idx) train_keys.insert(key_of(i));
    std::sort(test_idx.begin(), test_idx.end());
    std::vector<std::size_t> kept_test;
    for (std::size_t i : test_idx) {
        if (train_keys.count(key_of(i))) train_idx.push_back(i);
        else kept_test.push_back(i);
    }
    test_idx = std::move(kept_test);

    std::map<int, long long> test_counts;
    for (std::size_t i : test_idx) ++test_counts[ds.cases[i].disease_id];
    for (const auto& [disease, idx] : by_disease) {
        if (test_counts[disease] < min_test_per_disease)
            fail("insufficient_cases", "disease " + std::to_string(disease) +
                                           " fell below the test floor after replica removal");
    }
    if (test_idx.empty()) fail("insufficient_cases", "test split is empty after replica removal");

    auto build = [&](std::vector<std::size_t>& idx, const char* role) {
        std::sort(idx.begin(), idx.end());
        Dataset out;
        out.kb_fingerprint = ds.kb_fingerprint;
        out.cases.reserve(idx.size());
        for (std::size_t i : idx) out.cases.push_back(ds.cases[i]);
        out.provenance = ds.provenance;
        out.provenance["split"] = role;
        out.provenance["split_seed"] = seed;
        out.provenance["min_test_per_disease"] = min_test_per_disease;
        return out;
    };
    SplitResult result{build(train_idx, "train"), build(val_idx, "validation"), build(test_idx, "test")};
    return result;
}

Dataset resample_balance(const Dataset& train, std::uint64_t seed) {
    if (train.cases.empty()) fail("empty_request", "cannot balance an empty training set");
    std::map<int, std::vector<std::size_t>> by_disease;
    long long max_id = 0;
    for (std::size_t i = 0; i < train.cases.size(); ++i) {
        by_disease[train.cases[i].disease_id].push_back(i);
        max_id = std::max(max_id, train.cases[i].id);
    }
    std::size_t target = 0;
    for (const auto& [d, idx] : by_disease) target = std::max(target, idx.size());

    Dataset out = train;
    long long next_id = max_id + 1;
    std::uint64_t stream = 0;
    for (const auto& [disease, idx] : by_disease) {
        Rng rng = Rng::derive(seed, stream++);
        for (std::size_t n = idx.size(); n < target; ++n) {
            Case c = train.cases[idx[rng.below(idx.size())]];
            c.id = next_id++;
            out.cases.push_back(std::move(c));
        }
    }
    out.provenance["balanced"] = true;
    out.provenance["balance_seed"] = seed;
    return out;
}

std::vector<int> prevalent_pool(const KnowledgeBase& kb, int pool_size,
                                const std::set<FindingType>& types) {
    if (pool_size < 1) fail("config", "pool size must be >= 1");

    // degree x mean frequency points == summed frequency points over links
    std::unordered_map<int, long long> score;
    std::vector<std::pair<long long, int>> order; // (-score, id) ascending
    for (const auto& f : kb.findings) {
        if (types.count(f.ftype)) score[f.id] = 0;
    }
    for (const Link& l : kb.links) {
        auto it = score.find(l.finding_id);
        if (it != score.end()) it->second += freq_points(l.frequency);
    }
    if (pool_size > static_cast<int>(score.size()))
        fail("pool_too_large", "pool size exceeds the finding universe");
    order.reserve(score.size());
    for (const auto& f : kb.findings) {
        auto it = score.find(f.id);
        if (it != score.end()) order.push_back({-it->second, f.id});
    }
    std::sort(order.begin(), order.end());
    std::vector<int> pool;
    pool.reserve(static_cast<std::size_t>(pool_size));
    for (int i = 0; i < pool_size; ++i) pool.push_back(order[static_cast<std::size_t>(i)].second);
    return pool;
}

std::vector<int> prevalent_pool(const KnowledgeBase& kb, int pool_size) {
    return prevalent_pool(kb, pool_size,
                          {FindingType::history, FindingType::symptom, FindingType::sign,
                           FindingType::lab, FindingType::demographic});
}

const char* to_string(NoiseMode m) {
    return m == NoiseMode::prevalent_add ? "prevalent_add" : "random_remove";
}

NoiseMode noise_mode_from_string(const std::string& s) {
    if (s == "prevalent_add") return NoiseMode::prevalent_add;
    if (s == "random_remove") return NoiseMode::random_remove;
    fail("config", "unknown noise mode '" + s + "'");
}

json NoiseSpec::to_json() const {
    json j;
    j["mode"] = to_string(mode);
    j["fraction"] = fraction;
    j["k_min"] = k_min;
    j["k_max"] = k_max;
    return j;
}

Case corrupt_case(const Case& c, NoiseMode mode, int k, const std::vector<int>& pool,
                  const KbIndex& index, Rng& rng) {
    Case out = c;
    if (k <= 0) return out;
    if (mode == NoiseMode::prevalent_add) {
        if (pool.empty()) fail("config", "prevalent_add needs a non-empty pool");
        auto violates_exclusion = [&](int finding_id) {
            for (int partner : index.exclusion_partners(finding_id)) {
                if (contains_sorted(out.findings_present, partner)) return true;
            }
            return false;
        };
        for (int added = 0; added < k; ++added) {
            std::vector<int> eligible;
            for (int f : pool) {
                if (!contains_sorted(out.findings_present, f) && !violates_exclusion(f))
                    eligible.push_back(f);
            }
            if (eligible.empty()) break;
            insert_sorted_unique(out.findings_present, eligible[rng.below(eligible.size())]);
        }
    } else {
        // keep at least one finding
        int removable = static_cast<int>(out.findings_present.size()) - 1;
        int m = std::min(k, removable);
        if (m <= 0) return out;
        auto chosen = rng.sample_without_replacement(out.findings_present.size(),
                                                     static_cast<std::size_t>(m));
        std::sort(chosen.begin(), chosen.end(), std::greater<>());
        for (std::size_t pos : chosen) out.findings_present.erase(out.findings_present.begin() +
                                                                  static_cast<std::ptrdiff_t>(pos));
    }
    return out;
}

Dataset make_noisy_dataset(const Dataset& ds, const NoiseSpec& spec, const std::vector<int>& pool,
                           const KnowledgeBase& kb, std::uint64_t seed) {
    if (!(spec.fraction >= 0.0 && spec.fraction <= 1.0)) fail("config", "noise fraction must be in [0,1]");
    if (spec.k_min < 1 || spec.k_max < spec.k_min) fail("config", "noise k range must satisfy 1 <= k_min <= k_max");

    KbIndex index(kb);
    Dataset out = ds;
    auto n_corrupt = static_cast<std::size_t>(spec.fraction * static_cast<double>(ds.cases.size()));
    Rng select = Rng::derive(seed, 0);
    std::vector<std::size_t> chosen = select.sample_without_replacement(ds.cases.size(), n_corrupt);
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t i : chosen) {
        Rng rng = Rng::derive(seed, 1 + i);
        int k = rng.int_in(spec.k_min, spec.k_max);
        out.cases[i] = corrupt_case(ds.cases[i], spec.mode, k, pool, index, rng);
    }
    out.provenance["noise"] = spec.to_json();
    out.provenance["noise_seed"] = seed;
    out.provenance["corrupted"] = static_cast<long long>(n_corrupt);
    return out;
}

Dataset project_finding_types(const Dataset& ds, const std::set<FindingType>& types,
                              const KnowledgeBase& kb) {
    if (types.empty()) fail("config", "projection needs at least one finding type");
    KbIndex index(kb);
    Dataset out;
    out.kb_fingerprint = ds.kb_fingerprint;
    long long dropped = 0;
    for (const Case& c : ds.cases) {
        Case kept = c;
        kept.findings_present.clear();
        for (int f : c.findings_present) {
            if (types.count(index.finding(f).ftype)) kept.findings_present.push_back(f);
        }
        if (kept.findings_present.empty()) {
            ++dropped;
            continue;
        }
        out.cases.push_back(std::move(kept));
    }
    out.provenance = ds.provenance;
    json names = json::array();
    for (FindingType t : types) names.push_back(to_string(t));
    out.provenance["projection"] = names;
    out.provenance["dropped_empty"] = dropped;
    return out;
}

} // namespace ddx
