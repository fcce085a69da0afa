#include "ddx/knowledge_base.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "ddx/hash.hpp"

namespace ddx {

using nlohmann::json;

const char* to_string(FindingType t) {
    switch (t) {
        case FindingType::history: return "history";
        case FindingType::symptom: return "symptom";
        case FindingType::sign: return "sign";
        case FindingType::lab: return "lab";
        case FindingType::demographic: return "demographic";
    }
    return "symptom";
}

FindingType finding_type_from_string(const std::string& s) {
    if (s == "history") return FindingType::history;
    if (s == "symptom") return FindingType::symptom;
    if (s == "sign") return FindingType::sign;
    if (s == "lab") return FindingType::lab;
    if (s == "demographic") return FindingType::demographic;
    fail("parse", "unknown finding type '" + s + "'");
}

namespace {

long long pair_key(int a, int b) {
    return (static_cast<long long>(a) << 32) | static_cast<unsigned>(b);
}

bool valid_name(const std::string& name) {
    if (name.empty() || name.front() == ' ' || name.back() == ' ') return false;
    bool prev_space = false;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == ' ';
        if (!ok) return false;
        if (c == ' ') {
            if (prev_space) return false;
            prev_space = true;
        } else {
            prev_space = false;
        }
    }
    return true;
}

} // namespace

ValidationReport validate_kb(const KnowledgeBase& kb) {
    ValidationReport report;
    auto flag = [&](const std::string& code, const std::string& detail) {
        report.violations.push_back({code, detail});
    };

    std::unordered_set<int> finding_ids;
    std::unordered_set<std::string> finding_names;
    for (const auto& f : kb.findings) {
        if (!finding_ids.insert(f.id).second)
            flag("duplicate_finding_id", "finding id " + std::to_string(f.id));
        if (!finding_names.insert(f.name).second)
            flag("duplicate_finding_name", "finding name '" + f.name + "'");
        if (!valid_name(f.name))
            flag("bad_finding_name", "finding " + std::to_string(f.id) + " name '" + f.name +
                                         "' must be lowercase [a-z0-9] words separated by single spaces");
        if (f.import < 1 || f.import > 5)
            flag("score_range", "finding " + std::to_string(f.id) + " import " + std::to_string(f.import));
    }

    std::unordered_set<int> disease_ids;
    std::unordered_set<std::string> disease_names; // primary names and aliases share one namespace
    for (const auto& d : kb.diseases) {
        if (!disease_ids.insert(d.id).second)
            flag("duplicate_disease_id", "disease id " + std::to_string(d.id));
        if (!disease_names.insert(d.name).second)
            flag("duplicate_disease_name", "disease name '" + d.name + "'");
        for (const auto& a : d.aliases) {
            if (!disease_names.insert(a).second)
                flag("duplicate_alias", "alias '" + a + "' of disease " + std::to_string(d.id));
        }
        if (d.history_link_frequency && (*d.history_link_frequency < 1 || *d.history_link_frequency > 5))
            flag("score_range", "disease " + std::to_string(d.id) + " history_link_frequency");
    }

    std::unordered_set<long long> link_pairs;
    for (const auto& l : kb.links) {
        if (!disease_ids.count(l.disease_id) || !finding_ids.count(l.finding_id))
            flag("dangling_link", "link (" + std::to_string(l.disease_id) + ", " +
                                      std::to_string(l.finding_id) + ")");
        if (!link_pairs.insert(pair_key(l.disease_id, l.finding_id)).second)
            flag("duplicate_link", "link (" + std::to_string(l.disease_id) + ", " +
                                       std::to_string(l.finding_id) + ")");
        if (l.evoking_strength < 1 || l.evoking_strength > 5 || l.frequency < 1 || l.frequency > 5)
            flag("score_range", "link (" + std::to_string(l.disease_id) + ", " +
                                    std::to_string(l.finding_id) + ")");
    }

    for (const auto& g : kb.exclusions) {
        if (g.finding_ids.size() < 2)
            flag("exclusion_too_small", "exclusion group needs >= 2 findings");
        std::unordered_set<int> members;
        for (int id : g.finding_ids) {
            if (!finding_ids.count(id))
                flag("exclusion_dangling", "exclusion member " + std::to_string(id));
            if (!members.insert(id).second)
                flag("exclusion_duplicate_member", "finding " + std::to_string(id));
        }
    }

    std::unordered_set<long long> cooccur_pairs;
    for (const auto& p : kb.cooccurrences) {
        if (p.finding_a == p.finding_b)
            flag("cooccur_self", "finding " + std::to_string(p.finding_a));
        if (!finding_ids.count(p.finding_a) || !finding_ids.count(p.finding_b))
            flag("cooccur_dangling", "pair (" + std::to_string(p.finding_a) + ", " +
                                         std::to_string(p.finding_b) + ")");
        int lo = std::min(p.finding_a, p.finding_b);
        int hi = std::max(p.finding_a, p.finding_b);
        if (!cooccur_pairs.insert(pair_key(lo, hi)).second)
            flag("cooccur_duplicate", "pair (" + std::to_string(lo) + ", " + std::to_string(hi) + ")");
        if (!(p.strength > 0.0 && p.strength <= 1.0))
            flag("cooccur_strength", "pair (" + std::to_string(p.finding_a) + ", " +
                                         std::to_string(p.finding_b) + ")");
    }

    std::unordered_set<long long> predisposing_seen;
    for (const auto& [d, f] : kb.predisposing) {
        if (!link_pairs.count(pair_key(d, f)))
            flag("predisposing_dangling", "flag (" + std::to_string(d) + ", " + std::to_string(f) +
                                              ") has no matching link");
        if (!predisposing_seen.insert(pair_key(d, f)).second)
            flag("predisposing_duplicate", "flag (" + std::to_string(d) + ", " + std::to_string(f) + ")");
    }

    return report;
}

void canonicalize(KnowledgeBase& kb) {
    std::sort(kb.findings.begin(), kb.findings.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    std::sort(kb.diseases.begin(), kb.diseases.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    for (auto& d : kb.diseases) std::sort(d.aliases.begin(), d.aliases.end());
    std::sort(kb.links.begin(), kb.links.end(), [](const Link& a, const Link& b) {
        return std::tie(a.disease_id, a.finding_id) < std::tie(b.disease_id, b.finding_id);
    });
    for (auto& g : kb.exclusions) std::sort(g.finding_ids.begin(), g.finding_ids.end());
    std::sort(kb.exclusions.begin(), kb.exclusions.end(),
              [](const auto& a, const auto& b) { return a.finding_ids < b.finding_ids; });
    for (auto& p : kb.cooccurrences) {
        if (p.finding_a > p.finding_b) std::swap(p.finding_a, p.finding_b);
    }
    std::sort(kb.cooccurrences.begin(), kb.cooccurrences.end(), [](const auto& a, const auto& b) {
        return std::tie(a.finding_a, a.finding_b) < std::tie(b.finding_a, b.finding_b);
    });
    std::sort(kb.predisposing.begin(), kb.predisposing.end());
}

std::string serialize_kb(const KnowledgeBase& kb_in) {
    KnowledgeBase kb = kb_in;
    canonicalize(kb);

    json j;
    j["kb_version"] = 1;
    j["findings"] = json::array();
    for (const auto& f : kb.findings) {
        json e;
        e["id"] = f.id;
        e["name"] = f.name;
        e["ftype"] = to_string(f.ftype);
        e["import"] = f.import;
        j["findings"].push_back(e);
    }
    j["diseases"] = json::array();
    for (const auto& d : kb.diseases) {
        json e;
        e["id"] = d.id;
        e["name"] = d.name;
        e["aliases"] = d.aliases;
        if (d.history_link_frequency) e["history_link_frequency"] = *d.history_link_frequency;
        j["diseases"].push_back(e);
    }
    j["links"] = json::array();
    for (const auto& l : kb.links) {
        json e;
        e["disease"] = l.disease_id;
        e["finding"] = l.finding_id;
        e["evoking_strength"] = l.evoking_strength;
        e["frequency"] = l.frequency;
        j["links"].push_back(e);
    }
    j["exclusions"] = json::array();
    for (const auto& g : kb.exclusions) j["exclusions"].push_back(g.finding_ids);
    j["cooccurrences"] = json::array();
    for (const auto& p : kb.cooccurrences) {
        json e;
        e["a"] = p.finding_a;
        e["b"] = p.finding_b;
        e["strength"] = p.strength;
        j["cooccurrences"].push_back(e);
    }
    j["predisposing"] = json::array();
    for (const auto& [d, f] : kb.predisposing) j["predisposing"].push_back({d, f});

    return j.dump(2) + "\n";
}

namespace {

const json& require(const json& obj, const char* key, const char* ctx) {
    auto it = obj.find(key);
    if (it == obj.end())
        fail("parse", std::string(ctx) + ": missing key '" + key + "'");
    return *it;
}

int require_int(const json& obj, const char* key, const char* ctx) {
    const json& v = require(obj, key, ctx);
    if (!v.is_number_integer())
        fail("parse", std::string(ctx) + ": key '" + key + "' must be an integer");
    return v.get<int>();
}

std::string require_str(const json& obj, const char* key, const char* ctx) {
    const json& v = require(obj, key, ctx);
    if (!v.is_string())
        fail("parse", std::string(ctx) + ": key '" + key + "' must be a string");
    return v.get<std::string>();
}

} // namespace

KnowledgeBase parse_kb(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail("parse", std::string("knowledge base is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("parse", "knowledge base file must hold a JSON object");
    if (require_int(j, "kb_version", "root") != 1)
        fail("parse", "unsupported kb_version (expected 1)");

    KnowledgeBase kb;
    for (const auto& e : require(j, "findings", "root")) {
        FindingDef f;
        f.id = require_int(e, "id", "finding");
        f.name = require_str(e, "name", "finding");
        f.ftype = finding_type_from_string(require_str(e, "ftype", "finding"));
        f.import = require_int(e, "import", "finding");
        kb.findings.push_back(std::move(f));
    }
    for (const auto& e : require(j, "diseases", "root")) {
        DiseaseDef d;
        d.id = require_int(e, "id", "disease");
        d.name = require_str(e, "name", "disease");
        for (const auto& a : require(e, "aliases", "disease")) {
            if (!a.is_string()) fail("parse", "disease aliases must be strings");
            d.aliases.push_back(a.get<std::string>());
        }
        if (e.contains("history_link_frequency"))
            d.history_link_frequency = require_int(e, "history_link_frequency", "disease");
        kb.diseases.push_back(std::move(d));
    }
    for (const auto& e : require(j, "links", "root")) {
        Link l;
        l.disease_id = require_int(e, "disease", "link");
        l.finding_id = require_int(e, "finding", "link");
        l.evoking_strength = require_int(e, "evoking_strength", "link");
        l.frequency = require_int(e, "frequency", "link");
        kb.links.push_back(l);
    }
    for (const auto& e : require(j, "exclusions", "root")) {
        ExclusionGroup g;
        if (!e.is_array()) fail("parse", "exclusion group must be an array of finding ids");
        for (const auto& id : e) {
            if (!id.is_number_integer()) fail("parse", "exclusion member must be an integer id");
            g.finding_ids.push_back(id.get<int>());
        }
        kb.exclusions.push_back(std::move(g));
    }
    for (const auto& e : require(j, "cooccurrences", "root")) {
        CoOccurrencePair p;
        p.finding_a = require_int(e, "a", "cooccurrence");
        p.finding_b = require_int(e, "b", "cooccurrence");
        const json& s = require(e, "strength", "cooccurrence");
        if (!s.is_number()) fail("parse", "cooccurrence strength must be a number");
        p.strength = s.get<double>();
        kb.cooccurrences.push_back(p);
    }
    for (const auto& e : require(j, "predisposing", "root")) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
            fail("parse", "predisposing entry must be [disease_id, finding_id]");
        kb.predisposing.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    canonicalize(kb);
    return kb;
}

void save_kb(const KnowledgeBase& kb, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io", "cannot open '" + path + "' for writing");
    out << serialize_kb(kb);
    if (!out) fail("io", "failed writing '" + path + "'");
}

KnowledgeBase load_kb(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io", "cannot open knowledge base file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    KnowledgeBase kb = parse_kb(buf.str());
    ValidationReport report = validate_kb(kb);
    if (!report.ok()) {
        std::string msg = "knowledge base failed validation:";
        std::size_t shown = 0;
        for (const auto& v : report.violations) {
            if (shown++ == 5) {
                msg += " ... (" + std::to_string(report.violations.size()) + " total)";
                break;
            }
            msg += " [" + v.code + "] " + v.detail + ";";
        }
        fail("kb_invalid", msg);
    }
    return kb;
}

std::string kb_fingerprint(const KnowledgeBase& kb) {
    return content_hash(serialize_kb(kb));
}

KbIndex::KbIndex(const KnowledgeBase& kb) : kb_(&kb) {
    for (std::size_t i = 0; i < kb.findings.size(); ++i) finding_pos_[kb.findings[i].id] = i;
    for (std::size_t i = 0; i < kb.diseases.size(); ++i) {
        disease_pos_[kb.diseases[i].id] = i;
        disease_ids_.push_back(kb.diseases[i].id);
    }
    std::sort(disease_ids_.begin(), disease_ids_.end());
    for (const auto& l : kb.links) profiles_[l.disease_id].push_back(l);
    for (auto& [id, links] : profiles_) {
        std::sort(links.begin(), links.end(),
                  [](const Link& a, const Link& b) { return a.finding_id < b.finding_id; });
        for (const auto& l : links) link_by_pair_[pair_key(l.disease_id, l.finding_id)] = &l;
    }
    for (const auto& [d, f] : kb.predisposing) predisposing_[pair_key(d, f)] = true;
    for (const auto& g : kb.exclusions) {
        for (int a : g.finding_ids) {
            for (int b : g.finding_ids) {
                if (a != b) exclusion_partners_[a].push_back(b);
            }
        }
    }
    for (auto& [id, partners] : exclusion_partners_) {
        std::sort(partners.begin(), partners.end());
        partners.erase(std::unique(partners.begin(), partners.end()), partners.end());
    }
    for (const auto& p : kb.cooccurrences) {
        cooccur_partners_[p.finding_a].emplace_back(p.finding_b, p.strength);
        cooccur_partners_[p.finding_b].emplace_back(p.finding_a, p.strength);
    }
    for (auto& [id, partners] : cooccur_partners_) {
        std::sort(partners.begin(), partners.end(), [](const auto& a, const auto& b) {
            return std::tie(b.second, a.first) < std::tie(a.second, b.first); // strength desc, id asc
        });
    }
}

const FindingDef& KbIndex::finding(int id) const {
    auto it = finding_pos_.find(id);
    if (it == finding_pos_.end()) fail("unknown_finding", "finding id " + std::to_string(id));
    return kb_->findings[it->second];
}

const DiseaseDef& KbIndex::disease(int id) const {
    auto it = disease_pos_.find(id);
    if (it == disease_pos_.end()) fail("unknown_disease", "disease id " + std::to_string(id));
    return kb_->diseases[it->second];
}

const std::vector<Link>& KbIndex::profile(int disease_id) const {
    auto it = profiles_.find(disease_id);
    return it == profiles_.end() ? empty_profile_ : it->second;
}

const Link* KbIndex::link(int disease_id, int finding_id) const {
    auto it = link_by_pair_.find(pair_key(disease_id, finding_id));
    return it == link_by_pair_.end() ? nullptr : it->second;
}

bool KbIndex::is_predisposing(int disease_id, int finding_id) const {
    return predisposing_.count(pair_key(disease_id, finding_id)) > 0;
}

const std::vector<int>& KbIndex::exclusion_partners(int finding_id) const {
    auto it = exclusion_partners_.find(finding_id);
    return it == exclusion_partners_.end() ? empty_ints_ : it->second;
}

const std::vector<std::pair<int, double>>& KbIndex::cooccur_partners(int finding_id) const {
    auto it = cooccur_partners_.find(finding_id);
    return it == cooccur_partners_.end() ? empty_cooccur_ : it->second;
}

} // namespace ddx
