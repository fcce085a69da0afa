#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddx/errors.hpp"

namespace ddx {

// One labeled patient presentation.
struct Case {
    long long id = 0;
    int disease_id = 0;
    std::vector<int> findings_present; // sorted, unique, non-empty
    std::vector<int> history_of;       // sorted, unique, possibly empty

    bool operator==(const Case&) const = default;
};

struct Dataset {
    std::string kb_fingerprint;
    std::vector<Case> cases;
    nlohmann::json provenance = nlohmann::json::object();
};

// JSONL dataset file, one case per line:
//   {"disease": int, "findings": [int...], "history": [int...], "id": int}
// plus a <path>.meta.json sidecar carrying kb_fingerprint and provenance.
std::string serialize_cases(const std::vector<Case>& cases);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path); // missing sidecar -> empty fingerprint

std::string dataset_content_hash(const Dataset& ds); // hash of the JSONL body

// Insert into a sorted unique id vector; no-op when already present.
void insert_sorted_unique(std::vector<int>& v, int id);
bool contains_sorted(const std::vector<int>& v, int id);

} // namespace ddx
