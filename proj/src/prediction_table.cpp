#include "promptgauge/prediction_table.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "promptgauge/errors.hpp"

namespace promptgauge {

void validate_table(const PredictionTable& table, const ClassSpace& space) {
    const std::size_t n = table.sample_ids.size();
    if (table.cells.size() != n) {
        throw ValidationError("cell row count does not match sample count");
    }
    std::unordered_set<std::string_view> ids;
    for (const auto& id : table.sample_ids) {
        if (!ids.insert(id).second) {
            throw ValidationError("duplicate sample id: " + id);
        }
    }
    if (table.gold_labels) {
        if (table.gold_labels->size() != n) {
            throw ValidationError("gold label count does not match sample count");
        }
        for (std::size_t gold : *table.gold_labels) {
            if (gold >= space.num_labels()) {
                throw ValidationError("gold label index out of range");
            }
        }
    }

    std::set<std::pair<std::size_t, std::size_t>> gap_set(table.gaps.begin(), table.gaps.end());
    for (const auto& [row, col] : gap_set) {
        if (row >= n || col >= table.q) {
            throw ValidationError("gap coordinates out of range");
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (table.cells[i].size() != table.q) {
            throw ValidationError("row " + table.sample_ids[i] + " does not have Q cells");
        }
        for (std::size_t k = 0; k < table.q; ++k) {
            if (gap_set.count({i, k})) continue;
            if (!space.valid_outcome(table.cells[i][k])) {
                throw ValidationError("invalid outcome in row " + table.sample_ids[i]);
            }
        }
    }
}

void require_complete(const PredictionTable& table) {
    if (!table.complete()) {
        throw InvalidInputError("prediction table has " + std::to_string(table.gaps.size()) +
                                " unfilled cells; metrics need a complete table");
    }
}

}  // namespace promptgauge
