#pragma once

#include <algorithm>
#include <vector>

namespace ddx {

struct RankedEntry {
    int disease_id = 0;
    double score = 0.0;
};

// Ordered differential: score descending, ties by ascending disease id; every
// disease of the source model appears exactly once.
struct RankedDifferential {
    std::vector<RankedEntry> entries;
};

inline void sort_ranked(std::vector<RankedEntry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.disease_id < b.disease_id;
    });
}

} // namespace ddx
