#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "promptgauge/class_space.hpp"
#include "promptgauge/prediction_table.hpp"

namespace promptgauge {

// Versioned JSON table format. Cells hold the label index or "NA"; cells an
// aborted run never filled are null and listed in "gaps".
inline constexpr int kTableFormatVersion = 1;

nlohmann::json table_to_json(const PredictionTable& table, const ClassSpace& space,
                             const std::string& manifest_ref);
void export_table(const PredictionTable& table, const ClassSpace& space,
                  const std::string& manifest_ref, const std::filesystem::path& path);

struct LoadedTable {
    PredictionTable table;
    ClassSpace space;
    std::string manifest_ref;
};

LoadedTable table_from_json(const nlohmann::json& doc);
LoadedTable load_table(const std::filesystem::path& path);

}  // namespace promptgauge
