#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "promptgauge/class_space.hpp"

namespace promptgauge {

// The N x Q grid of parsed label outcomes every metric is computed from.
// `gaps` lists (row, column) cells an aborted run never filled; complete tables
// have an empty gap list and metric operations require that.
struct PredictionTable {
    std::vector<std::string> sample_ids;                    // N, unique
    std::optional<std::vector<std::size_t>> gold_labels;    // label indices, never N/A
    std::vector<std::vector<Outcome>> cells;                // N rows of Q outcomes
    std::size_t q = 0;
    std::vector<std::pair<std::size_t, std::size_t>> gaps;  // unfilled cells, row-major order

    std::size_t num_samples() const { return sample_ids.size(); }
    bool has_gold() const { return gold_labels.has_value(); }
    bool complete() const { return gaps.empty(); }
};

// Shape and range checks against the space. Gap cells are exempt from the
// N/A-only-if-enabled rule (they hold placeholder values).
void validate_table(const PredictionTable& table, const ClassSpace& space);

// Throws InvalidInputError unless the table is complete; used by every metric
// entry point that must not silently compute on a partial run.
void require_complete(const PredictionTable& table);

}  // namespace promptgauge
