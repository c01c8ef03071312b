#include "promptgauge/baselines.hpp"

#include <cstdio>
#include <ostream>
#include <random>

#include "promptgauge/detail/rng.hpp"
#include "promptgauge/errors.hpp"

namespace promptgauge {

PredictionTable perturb_table(const PredictionTable& table, const ClassSpace& space,
                              const PerturbationConfig& config) {
    require_complete(table);
    validate_table(table, space);
    if (space.num_labels() < 2) {
        throw InvalidInputError("perturbation needs at least two labels to swap between");
    }
    if (config.swap_probability < 0.0 || config.swap_probability > 1.0) {
        throw InvalidInputError("swap probability must be in [0, 1]");
    }

    PredictionTable out = table;
    std::mt19937_64 rng(config.rng_seed);
    const std::uint64_t alternatives = space.num_labels() - 1;

    for (auto& row : out.cells) {
        for (auto& cell : row) {
            if (cell.is_na()) continue;
            if (detail::unit_real(rng) < config.swap_probability) {
                std::uint64_t pick = detail::uniform_below(rng, alternatives);
                if (pick >= static_cast<std::uint64_t>(cell.index())) ++pick;
                cell = Outcome::label(static_cast<int>(pick));
            }
        }
    }
    return out;
}

PredictionTable random_table(const ClassSpace& space, std::vector<std::string> sample_ids,
                             std::optional<std::vector<std::size_t>> gold, std::size_t q,
                             std::uint64_t seed) {
    if (q < 1) throw InvalidInputError("random table needs at least one rephrasing column");
    if (gold && gold->size() != sample_ids.size()) {
        throw InvalidInputError("gold label count does not match sample count");
    }

    PredictionTable table;
    table.q = q;
    table.sample_ids = std::move(sample_ids);
    table.gold_labels = std::move(gold);

    std::mt19937_64 rng(seed);
    table.cells.reserve(table.sample_ids.size());
    for (std::size_t i = 0; i < table.sample_ids.size(); ++i) {
        std::vector<Outcome> row;
        row.reserve(q);
        for (std::size_t k = 0; k < q; ++k) {
            row.push_back(Outcome::label(
                static_cast<int>(detail::uniform_below(rng, space.num_labels()))));
        }
        table.cells.push_back(std::move(row));
    }
    validate_table(table, space);
    return table;
}

ScatterResult sensitivity_consistency_scatter(const PredictionTable& table,
                                              const ClassSpace& space,
                                              const MetricsOptions& options) {
    require_complete(table);
    if (!table.has_gold()) {
        throw MissingLabelsError("the scatter needs gold labels to group same-class samples");
    }

    const MetricsReport report = compute_report(table, space, options);

    ScatterResult result;
    for (const auto& sample : report.per_sample) {
        if (!sample.avg_consistency) {
            result.warnings.push_back("sample " + sample.sample_id +
                                      " omitted: no other samples share its class");
            continue;
        }
        result.points.push_back(
            ScatterPoint{sample.sample_id, sample.sensitivity, *sample.avg_consistency});
    }
    return result;
}

void write_scatter_csv(std::ostream& out, std::span<const ScatterPoint> points,
                       const std::string& variant, bool header) {
    if (header) out << "sample_id,sensitivity,avg_consistency,variant\n";
    char buf[64];
    for (const auto& point : points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", point.sensitivity, point.avg_consistency);
        out << point.sample_id << ',' << buf << ',' << variant << '\n';
    }
}

}  // namespace promptgauge
