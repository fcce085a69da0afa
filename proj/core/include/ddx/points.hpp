#pragma once

#include "ddx/errors.hpp"

namespace ddx {

// Non-linear weight tables of the Internist-1/QMR scoring scheme. Scores are
// expert-assigned integers on a 1..5 scale.

// Evoking-strength points: 1..5 -> {1, 10, 20, 40, 80}.
inline int es_points(int score) {
    static constexpr int table[5] = {1, 10, 20, 40, 80};
    if (score < 1 || score > 5) fail("out_of_range", "evoking strength score must be in [1,5]");
    return table[score - 1];
}

// Frequency points: 1..5 -> {1, 4, 7, 15, 30}. The same table weights import.
inline int freq_points(int score) {
    static constexpr int table[5] = {1, 4, 7, 15, 30};
    if (score < 1 || score > 5) fail("out_of_range", "frequency score must be in [1,5]");
    return table[score - 1];
}

inline int import_points(int score) { return freq_points(score); }

} // namespace ddx
