#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "promptgauge/class_space.hpp"
#include "promptgauge/metrics.hpp"
#include "promptgauge/prediction_table.hpp"

namespace promptgauge {

struct PerturbationConfig {
    double swap_probability = 0.5;
    std::uint64_t rng_seed = 42;
};

// Noisy comparison predictor: each real-label cell is independently replaced,
// with the configured probability, by a uniformly drawn *different* label
// (so a swap always changes the cell). N/A cells are left untouched.
// Deterministic for a fixed seed.
PredictionTable perturb_table(const PredictionTable& table, const ClassSpace& space,
                              const PerturbationConfig& config);

// Fully random comparison predictor: every cell uniform over the real labels.
PredictionTable random_table(const ClassSpace& space, std::vector<std::string> sample_ids,
                             std::optional<std::vector<std::size_t>> gold, std::size_t q,
                             std::uint64_t seed);

struct ScatterPoint {
    std::string sample_id;
    double sensitivity = 0.0;
    double avg_consistency = 0.0;  // vs all *other* same-class samples
};

struct ScatterResult {
    std::vector<ScatterPoint> points;
    std::vector<std::string> warnings;  // e.g. singleton classes omitted
};

// One point per sample: sensitivity and mean pairwise consistency against the
// other samples of its gold class (self excluded). Samples in singleton
// classes are omitted with a warning.
ScatterResult sensitivity_consistency_scatter(const PredictionTable& table,
                                              const ClassSpace& space,
                                              const MetricsOptions& options = {});

// CSV rows: sample_id, sensitivity, avg_consistency, variant.
void write_scatter_csv(std::ostream& out, std::span<const ScatterPoint> points,
                       const std::string& variant, bool header = true);

}  // namespace promptgauge
