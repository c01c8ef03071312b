#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptgauge/dataset.hpp"
#include "promptgauge/metrics.hpp"
#include "promptgauge/triage.hpp"

namespace promptgauge {

struct ReportOptions {
    std::size_t histogram_bins = 10;
    std::size_t triage_k = 10;
    double triage_min_sensitivity = 0.0;
    // Raw consistency matrices above this class size are left out of the JSON
    // and CSV output (everything else stays recomputable from the table).
    std::size_t matrix_output_limit = 200;
    std::size_t excerpt_length = 80;
    MetricsOptions metrics;
};

// Everything the report files are rendered from; each number is recomputable
// from the referenced prediction table alone.
struct ReportBundle {
    std::string manifest_ref;
    std::string strategy;    // context from the manifest, may be empty
    std::string model_name;  // context from the manifest, may be empty
    std::vector<std::string> labels;
    bool na_enabled = false;
    std::size_t n = 0;
    std::size_t q = 0;
    MetricsReport metrics;
    std::vector<std::pair<std::string, std::vector<std::size_t>>> histograms;
    TriageList sensitive;
    std::map<std::string, TriageList> inconsistent_by_class;
    std::map<std::string, std::string> excerpts;  // sample id -> shortened text
    ReportOptions options;
};

ReportBundle build_report_bundle(const PredictionTable& table, const ClassSpace& space,
                                 const std::string& manifest_ref,
                                 const ReportOptions& options = {},
                                 const std::vector<DatasetSample>* dataset = nullptr,
                                 const std::string& strategy = "",
                                 const std::string& model_name = "");

nlohmann::json bundle_to_json(const ReportBundle& bundle);

// Renders report.txt and the CSV set from a bundle document (as produced by
// bundle_to_json / read back from report.json). Human-readable numbers use the
// three-decimal ".xxx" style; matrix CSVs keep full precision for plotting.
void render_report_files(const nlohmann::json& bundle, const std::filesystem::path& out_dir,
                         bool write_text = true, bool write_csv = true);

// ".848" / "1.000" / "-.070" style used across the text report.
std::string format3(double value);
// "<sensitivity>/<consistency>/<micro_f1>" summary cell.
std::string summary_cell(double sensitivity, double consistency, double micro_f1);

}  // namespace promptgauge
