#include "promptgauge/table_io.hpp"

#include <fstream>
#include <set>

#include "promptgauge/errors.hpp"

namespace promptgauge {

namespace {
using nlohmann::json;
}

json table_to_json(const PredictionTable& table, const ClassSpace& space,
                   const std::string& manifest_ref) {
    validate_table(table, space);

    const std::set<std::pair<std::size_t, std::size_t>> gap_set(table.gaps.begin(),
                                                                table.gaps.end());
    json cells = json::array();
    for (std::size_t i = 0; i < table.num_samples(); ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < table.q; ++k) {
            if (gap_set.count({i, k})) {
                row.push_back(nullptr);
            } else if (table.cells[i][k].is_na()) {
                row.push_back("NA");
            } else {
                row.push_back(table.cells[i][k].index());
            }
        }
        cells.push_back(std::move(row));
    }

    json doc{
        {"version", kTableFormatVersion},
        {"manifest_ref", manifest_ref},
        {"labels", space.labels()},
        {"na_enabled", space.na_enabled()},
        {"sample_ids", table.sample_ids},
        {"gold", table.gold_labels ? json(*table.gold_labels) : json(nullptr)},
        {"cells", std::move(cells)},
    };
    if (!table.gaps.empty()) {
        json gaps = json::array();
        for (const auto& [row, col] : table.gaps) gaps.push_back(json::array({row, col}));
        doc["gaps"] = std::move(gaps);
    }
    return doc;
}

void export_table(const PredictionTable& table, const ClassSpace& space,
                  const std::string& manifest_ref, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw StorageError("cannot write table to " + path.string());
    out << table_to_json(table, space, manifest_ref).dump(2) << '\n';
    if (!out) throw StorageError("short write on table file " + path.string());
}

LoadedTable table_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("version")) {
        throw FormatVersionError("table document has no version field");
    }
    if (!doc["version"].is_number_integer() ||
        doc["version"].get<int>() != kTableFormatVersion) {
        throw FormatVersionError("unsupported table format version: " + doc["version"].dump());
    }
    for (const char* field : {"labels", "na_enabled", "sample_ids", "cells"}) {
        if (!doc.contains(field)) {
            throw ParseError(std::string("table document missing field '") + field + "'");
        }
    }

    ClassSpace space(doc["labels"].get<std::vector<std::string>>(),
                     doc["na_enabled"].get<bool>());

    PredictionTable table;
    table.sample_ids = doc["sample_ids"].get<std::vector<std::string>>();
    if (doc.contains("gold") && !doc["gold"].is_null()) {
        table.gold_labels = doc["gold"].get<std::vector<std::size_t>>();
    }
    if (doc.contains("gaps")) {
        for (const auto& pair : doc["gaps"]) {
            table.gaps.emplace_back(pair.at(0).get<std::size_t>(),
                                    pair.at(1).get<std::size_t>());
        }
    }

    const json& cells = doc["cells"];
    if (!cells.is_array()) throw ParseError("'cells' must be an array");
    std::set<std::pair<std::size_t, std::size_t>> gap_set(table.gaps.begin(), table.gaps.end());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const json& row = cells[i];
        if (!row.is_array()) throw ParseError("cell row " + std::to_string(i) + " is not an array");
        if (i == 0) table.q = row.size();
        std::vector<Outcome> outcomes;
        outcomes.reserve(row.size());
        for (std::size_t k = 0; k < row.size(); ++k) {
            const json& cell = row[k];
            if (cell.is_null()) {
                if (!gap_set.count({i, k})) {
                    throw ParseError("null cell (" + std::to_string(i) + "," + std::to_string(k) +
                                     ") is not listed in gaps");
                }
                outcomes.push_back(Outcome::na());
            } else if (cell.is_string()) {
                if (cell.get<std::string>() != "NA") {
                    throw ParseError("unexpected cell token: " + cell.dump());
                }
                outcomes.push_back(Outcome::na());
            } else if (cell.is_number_integer()) {
                outcomes.push_back(Outcome::label(cell.get<int>()));
            } else {
                throw ParseError("unexpected cell value: " + cell.dump());
            }
        }
        table.cells.push_back(std::move(outcomes));
    }

    validate_table(table, space);
    return LoadedTable{std::move(table), std::move(space),
                       doc.value("manifest_ref", std::string())};
}

LoadedTable load_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot read table from " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ParseError("table file is not valid JSON");
    return table_from_json(doc);
}

}  // namespace promptgauge
