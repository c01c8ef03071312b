#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "promptgauge/class_space.hpp"
#include "promptgauge/metrics.hpp"
#include "promptgauge/prediction_table.hpp"

namespace promptgauge {

struct TriageEntry {
    std::string sample_id;
    std::string excerpt;  // filled by callers that have the sample texts
    double sensitivity = 0.0;
    std::optional<double> avg_consistency;
    std::optional<std::size_t> correct_count;  // of Q rephrasings, how many hit gold
    std::optional<std::string> gold_label;
};

struct TriageList {
    std::vector<TriageEntry> entries;
    std::vector<std::string> notices;
};

// Top-k samples by descending sensitivity; ties break by sample id ascending.
// Asking for more than N returns all N with a notice.
TriageList rank_sensitive(const PredictionTable& table, const ClassSpace& space, std::size_t k,
                          const MetricsOptions& options = {});

// Samples of one gold class with sensitivity strictly above the floor, ranked
// by ascending mean consistency against their classmates (self excluded).
TriageList rank_inconsistent(const PredictionTable& table, const ClassSpace& space,
                             const std::string& class_label, std::size_t k,
                             double min_sensitivity = 0.0, const MetricsOptions& options = {});

// Mean per-sample sensitivity grouped by gold class, in label order; classes
// with no samples are omitted.
std::vector<std::pair<std::string, double>> per_class_sensitivity(
    const PredictionTable& table, const ClassSpace& space, const MetricsOptions& options = {});

// Equal-width bins over [0, 1] of the distinct-pair consistencies (matrix
// upper triangle, or the drawn sample for estimated classes). Bin edges are
// inclusive on the left; the last bin also includes 1.
std::vector<std::size_t> consistency_histogram(const ClassConsistency& cc, std::size_t bin_count);

}  // namespace promptgauge
