#include "ddx/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ddx/hash.hpp"

namespace ddx {

using nlohmann::json;

std::string serialize_cases(const std::vector<Case>& cases) {
    std::string out;
    for (const Case& c : cases) {
        json line;
        line["id"] = c.id;
        line["disease"] = c.disease_id;
        line["findings"] = c.findings_present;
        line["history"] = c.history_of;
        out += line.dump();
        out += '\n';
    }
    return out;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail("io", "cannot open '" + path + "' for writing");
        out << serialize_cases(ds.cases);
        if (!out) fail("io", "failed writing '" + path + "'");
    }
    json meta;
    meta["kb_fingerprint"] = ds.kb_fingerprint;
    meta["provenance"] = ds.provenance;
    std::ofstream side(path + ".meta.json", std::ios::binary);
    if (!side) fail("io", "cannot open '" + path + ".meta.json' for writing");
    side << meta.dump(2) << "\n";
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io", "cannot open dataset file '" + path + "'");
    Dataset ds;
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail("parse", path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        Case c;
        try {
            c.id = j.at("id").get<long long>();
            c.disease_id = j.at("disease").get<int>();
            c.findings_present = j.at("findings").get<std::vector<int>>();
            c.history_of = j.at("history").get<std::vector<int>>();
        } catch (const json::exception& e) {
            fail("parse", path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        std::sort(c.findings_present.begin(), c.findings_present.end());
        std::sort(c.history_of.begin(), c.history_of.end());
        ds.cases.push_back(std::move(c));
    }

    std::ifstream side(path + ".meta.json", std::ios::binary);
    if (side) {
        std::stringstream buf;
        buf << side.rdbuf();
        try {
            json meta = json::parse(buf.str());
            ds.kb_fingerprint = meta.value("kb_fingerprint", "");
            ds.provenance = meta.value("provenance", json::object());
        } catch (const json::exception& e) {
            fail("parse", path + ".meta.json: " + std::string(e.what()));
        }
    }
    return ds;
}

std::string dataset_content_hash(const Dataset& ds) {
    return content_hash(serialize_cases(ds.cases));
}

void insert_sorted_unique(std::vector<int>& v, int id) {
    auto it = std::lower_bound(v.begin(), v.end(), id);
    if (it == v.end() || *it != id) v.insert(it, id);
}

bool contains_sorted(const std::vector<int>& v, int id) {
    return std::binary_search(v.begin(), v.end(), id);
}

} // namespace ddx
