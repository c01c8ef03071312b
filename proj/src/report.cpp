#include "promptgauge/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "promptgauge/errors.hpp"

namespace promptgauge {

namespace {

using nlohmann::json;

constexpr const char* kStdCaveat =
    "Sensitivity and consistency values are generally not normally distributed; "
    "standard deviations can be misleading, prefer the per-sample and per-class views.";

std::string sanitize_filename(const std::string& label) {
    std::string out;
    out.reserve(label.size());
    for (unsigned char c : label) {
        out += std::isalnum(c) ? static_cast<char>(c) : '_';
    }
    return out;
}

std::string excerpt_of(const std::string& text, std::size_t limit) {
    if (text.size() <= limit) return text;
    return text.substr(0, limit) + "...";
}

json quantiles_of(std::vector<double> values) {
    if (values.empty()) return nullptr;
    std::sort(values.begin(), values.end());
    const auto at = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    return json{{"min", values.front()}, {"q25", at(0.25)},   {"median", at(0.5)},
                {"q75", at(0.75)},       {"max", values.back()}};
}

json triage_entry_to_json(const TriageEntry& entry,
                          const std::map<std::string, std::string>& excerpts) {
    json out{
        {"sample_id", entry.sample_id},
        {"sensitivity", entry.sensitivity},
        {"avg_consistency", entry.avg_consistency ? json(*entry.avg_consistency) : json(nullptr)},
        {"correct_count", entry.correct_count ? json(*entry.correct_count) : json(nullptr)},
        {"gold_label", entry.gold_label ? json(*entry.gold_label) : json(nullptr)},
    };
    auto it = excerpts.find(entry.sample_id);
    out["excerpt"] = it != excerpts.end() ? json(it->second) : json(nullptr);
    return out;
}

json stats_to_json(const SummaryStats& stats) {
    return json{{"mean", stats.mean}, {"std", stats.std_dev}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw StorageError("cannot write report file: " + path.string());
    out << content;
    if (!out) throw StorageError("short write on report file: " + path.string());
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string format3(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", value);
    std::string text = buf;
    if (text.rfind("0.", 0) == 0) return text.substr(1);
    if (text.rfind("-0.", 0) == 0) return "-" + text.substr(2);
    return text;
}

std::string summary_cell(double sensitivity, double consistency, double micro_f1) {
    return format3(sensitivity) + "/" + format3(consistency) + "/" + format3(micro_f1);
}

ReportBundle build_report_bundle(const PredictionTable& table, const ClassSpace& space,
                                 const std::string& manifest_ref, const ReportOptions& options,
                                 const std::vector<DatasetSample>* dataset,
                                 const std::string& strategy, const std::string& model_name) {
    ReportBundle bundle;
    bundle.manifest_ref = manifest_ref;
    bundle.strategy = strategy;
    bundle.model_name = model_name;
    bundle.labels = space.labels();
    bundle.na_enabled = space.na_enabled();
    bundle.n = table.num_samples();
    bundle.q = table.q;
    bundle.options = options;

    bundle.metrics = compute_report(table, space, options.metrics);

    if (dataset) {
        for (const auto& sample : *dataset) {
            bundle.excerpts[sample.id] = excerpt_of(sample.text, options.excerpt_length);
        }
    }

    bundle.sensitive = rank_sensitive(table, space, options.triage_k, options.metrics);

    if (table.has_gold()) {
        for (const auto& cc : bundle.metrics.per_class_consistency) {
            bundle.histograms.emplace_back(cc.class_label,
                                           consistency_histogram(cc, options.histogram_bins));
            bundle.inconsistent_by_class[cc.class_label] =
                rank_inconsistent(table, space, cc.class_label, options.triage_k,
                                  options.triage_min_sensitivity, options.metrics);
        }
    }
    return bundle;
}

json bundle_to_json(const ReportBundle& bundle) {
    const MetricsReport& metrics = bundle.metrics;
    const bool has_gold = metrics.micro_f1.has_value();

    json summary{
        {"expected_sensitivity", metrics.expected_sensitivity},
        {"sensitivity_stats", stats_to_json(metrics.sensitivity_stats)},
        {"consistency",
         metrics.consistency_overall ? json(*metrics.consistency_overall) : json(nullptr)},
        {"consistency_offdiag", metrics.consistency_overall_offdiag
                                    ? json(*metrics.consistency_overall_offdiag)
                                    : json(nullptr)},
        {"consistency_stats",
         metrics.consistency_stats ? stats_to_json(*metrics.consistency_stats) : json(nullptr)},
        {"consistency_estimated", metrics.consistency_estimated},
        {"micro_f1_mean", has_gold ? json(metrics.micro_f1->mean) : json(nullptr)},
        {"micro_f1_stats",
         metrics.micro_f1_stats ? stats_to_json(*metrics.micro_f1_stats) : json(nullptr)},
        {"pearson",
         {{"threshold", metrics.pearson_threshold},
          {"value", metrics.pearson_filtered ? json(*metrics.pearson_filtered) : json(nullptr)},
          {"samples_used", metrics.pearson_sample_count}}},
        {"stats_caveat", kStdCaveat},
    };
    if (has_gold && metrics.consistency_overall) {
        summary["cell"] = summary_cell(metrics.expected_sensitivity,
                                       *metrics.consistency_overall, metrics.micro_f1->mean);
    } else {
        summary["cell"] = nullptr;
    }

    json flagged = json::array();
    std::vector<double> sens_values;
    sens_values.reserve(metrics.per_sample.size());
    json per_sample = json::array();
    for (const auto& sm : metrics.per_sample) {
        sens_values.push_back(sm.sensitivity);
        if (sm.exceeds_unit) flagged.push_back(sm.sample_id);
        json row{
            {"id", sm.sample_id},
            {"sensitivity", sm.sensitivity},
            {"distribution", sm.distribution.probs},
            {"avg_consistency",
             sm.avg_consistency ? json(*sm.avg_consistency) : json(nullptr)},
            {"exceeds_unit", sm.exceeds_unit},
        };
        auto it = bundle.excerpts.find(sm.sample_id);
        row["excerpt"] = it != bundle.excerpts.end() ? json(it->second) : json(nullptr);
        per_sample.push_back(std::move(row));
    }
    summary["flagged_samples"] = std::move(flagged);
    summary["sensitivity_quantiles"] = quantiles_of(sens_values);

    json per_class = json::array();
    for (std::size_t idx = 0; idx < metrics.per_class_consistency.size(); ++idx) {
        const ClassConsistency& cc = metrics.per_class_consistency[idx];
        json entry{
            {"label", cc.class_label},
            {"count", cc.member_rows.size()},
            {"consistency_expected", cc.expected},
            {"consistency_offdiag",
             cc.offdiag_mean ? json(*cc.offdiag_mean) : json(nullptr)},
            {"estimated", cc.estimated},
        };
        for (const auto& [label, value] : metrics.per_class_sensitivity) {
            if (label == cc.class_label) entry["mean_sensitivity"] = value;
        }
        for (const auto& [label, bins] : bundle.histograms) {
            if (label == cc.class_label) {
                entry["histogram"] = {{"bins", bins.size()}, {"counts", bins}};
            }
        }
        if (!cc.estimated && cc.matrix.size() <= bundle.options.matrix_output_limit) {
            entry["matrix"] = cc.matrix;
        } else {
            entry["matrix"] = nullptr;
        }
        std::vector<double> pair_values;
        if (!cc.estimated) {
            for (std::size_t i = 0; i < cc.matrix.size(); ++i) {
                for (std::size_t j = i + 1; j < cc.matrix.size(); ++j) {
                    pair_values.push_back(cc.matrix[i][j]);
                }
            }
        } else {
            pair_values = cc.sampled_offdiag;
        }
        entry["consistency_quantiles"] = quantiles_of(std::move(pair_values));
        per_class.push_back(std::move(entry));
    }

    json inconsistent = json::object();
    for (const auto& [label, list] : bundle.inconsistent_by_class) {
        json entries = json::array();
        for (const auto& entry : list.entries) {
            entries.push_back(triage_entry_to_json(entry, bundle.excerpts));
        }
        inconsistent[label] = std::move(entries);
    }
    json sensitive = json::array();
    for (const auto& entry : bundle.sensitive.entries) {
        sensitive.push_back(triage_entry_to_json(entry, bundle.excerpts));
    }

    json micro = nullptr;
    if (has_gold) {
        micro = json{{"per_rephrasing", metrics.micro_f1->per_rephrasing},
                     {"mean", metrics.micro_f1->mean}};
    }

    return json{
        {"version", 1},
        {"manifest_ref", bundle.manifest_ref},
        {"context", {{"strategy", bundle.strategy}, {"model", bundle.model_name}}},
        {"labels", bundle.labels},
        {"na_enabled", bundle.na_enabled},
        {"n", bundle.n},
        {"q", bundle.q},
        {"summary", std::move(summary)},
        {"per_sample", std::move(per_sample)},
        {"per_class", std::move(per_class)},
        {"micro_f1", std::move(micro)},
        {"triage", {{"sensitive", std::move(sensitive)}, {"inconsistent", std::move(inconsistent)}}},
        {"options",
         {{"histogram_bins", bundle.options.histogram_bins},
          {"triage_k", bundle.options.triage_k},
          {"triage_min_sensitivity", bundle.options.triage_min_sensitivity},
          {"na_in_denominator", bundle.options.metrics.na_in_denominator},
          {"pearson_threshold", bundle.options.metrics.pearson_threshold},
          {"class_size_cap", bundle.options.metrics.class_size_cap}}},
    };
}

void render_report_files(const json& bundle, const std::filesystem::path& out_dir,
                         bool write_text, bool write_csv) {
    if (!bundle.is_object() || bundle.value("version", 0) != 1) {
        throw FormatVersionError("unsupported report bundle version");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw StorageError("cannot create report directory " + out_dir.string());

    const json& summary = bundle.at("summary");
    const bool has_gold = !bundle.at("micro_f1").is_null();

    if (write_text) {
        std::string text;
        text += "promptgauge report\n";
        text += "==================\n";
        text += "run: " + bundle.value("manifest_ref", std::string("-")) + "\n";
        const json& context = bundle.at("context");
        if (!context.value("model", std::string()).empty()) {
            text += "model: " + context["model"].get<std::string>() +
                    ", strategy: " + context.value("strategy", std::string("-")) + "\n";
        }
        text += "samples: " + std::to_string(bundle.at("n").get<std::size_t>()) +
                ", rephrasings: " + std::to_string(bundle.at("q").get<std::size_t>()) +
                ", labels: " + std::to_string(bundle.at("labels").size()) +
                (bundle.at("na_enabled").get<bool>() ? " (+ N/A)" : "") + "\n\n";

        if (!summary.at("cell").is_null()) {
            text += "summary (sensitivity/consistency/micro-f1): " +
                    summary["cell"].get<std::string>() + "\n";
        }
        const json& sens_stats = summary.at("sensitivity_stats");
        text += "expected sensitivity: " +
                format3(summary.at("expected_sensitivity").get<double>()) + "  (std " +
                format3(sens_stats.at("std").get<double>()) + ")\n";
        if (!summary.at("consistency").is_null()) {
            text += "expected consistency: " + format3(summary["consistency"].get<double>());
            if (!summary.at("consistency_stats").is_null()) {
                text += "  (std " +
                        format3(summary["consistency_stats"].at("std").get<double>()) + ")";
            }
            text += "  [self-pairs included";
            if (summary.value("consistency_estimated", false)) text += ", estimated";
            text += "]\n";
            if (!summary.at("consistency_offdiag").is_null()) {
                text += "  off-diagonal mean:  " +
                        format3(summary["consistency_offdiag"].get<double>()) + "\n";
            }
        }
        if (has_gold) {
            text += "micro-F1 mean over rephrasings: " +
                    format3(summary.at("micro_f1_mean").get<double>());
            if (!summary.at("micro_f1_stats").is_null()) {
                text += "  (std " + format3(summary["micro_f1_stats"].at("std").get<double>()) +
                        ")";
            }
            text += "\n";
        }
        const json& pearson = summary.at("pearson");
        text += "pearson(sensitivity, consistency | s >= " +
                format3(pearson.at("threshold").get<double>()) + "): ";
        text += pearson.at("value").is_null() ? "n/a" : format3(pearson["value"].get<double>());
        text += "  (" + std::to_string(pearson.at("samples_used").get<std::size_t>()) +
                " samples)\n";
        if (!summary.at("flagged_samples").empty()) {
            text += "flagged (sensitivity > 1, N/A mass): " +
                    std::to_string(summary["flagged_samples"].size()) + " samples\n";
        }
        text += "note: " + summary.at("stats_caveat").get<std::string>() + "\n";

        if (!bundle.at("per_class").empty()) {
            text += "\nper-class:\n";
            char line[256];
            std::snprintf(line, sizeof(line), "  %-24s %6s %12s %12s %10s\n", "label", "n",
                          "sensitivity", "consistency", "offdiag");
            text += line;
            for (const auto& entry : bundle["per_class"]) {
                std::snprintf(line, sizeof(line), "  %-24s %6zu %12s %12s %10s%s\n",
                              entry.at("label").get<std::string>().c_str(),
                              entry.at("count").get<std::size_t>(),
                              format3(entry.at("mean_sensitivity").get<double>()).c_str(),
                              format3(entry.at("consistency_expected").get<double>()).c_str(),
                              entry.at("consistency_offdiag").is_null()
                                  ? "-"
                                  : format3(entry["consistency_offdiag"].get<double>()).c_str(),
                              entry.value("estimated", false) ? " (est)" : "");
                text += line;
            }
        }

        const json& sensitive = bundle.at("triage").at("sensitive");
        if (!sensitive.empty()) {
            text += "\nmost sensitive samples:\n";
            for (const auto& entry : sensitive) {
                text += "  (" + format3(entry.at("sensitivity").get<double>()) + ") " +
                        entry.at("sample_id").get<std::string>();
                if (!entry.at("correct_count").is_null()) {
                    text += " [" + std::to_string(entry["correct_count"].get<std::size_t>()) +
                            "/" + std::to_string(bundle.at("q").get<std::size_t>()) + " correct]";
                }
                if (!entry.at("excerpt").is_null()) {
                    text += " " + entry["excerpt"].get<std::string>();
                }
                text += "\n";
            }
        }
        const json& inconsistent = bundle.at("triage").at("inconsistent");
        for (const auto& [label, entries] : inconsistent.items()) {
            if (entries.empty()) continue;
            text += "\nleast consistent samples of class " + label +
                    " (sensitivity, consistency):\n";
            for (const auto& entry : entries) {
                text += "  (" + format3(entry.at("sensitivity").get<double>()) + ") (" +
                        format3(entry.at("avg_consistency").get<double>()) + ") " +
                        entry.at("sample_id").get<std::string>();
                if (!entry.at("excerpt").is_null()) {
                    text += " " + entry["excerpt"].get<std::string>();
                }
                text += "\n";
            }
        }
        write_file(out_dir / "report.txt", text);
    }

    if (!write_csv) return;

    {
        std::string csv = "metric,value\n";
        csv += "n," + std::to_string(bundle.at("n").get<std::size_t>()) + "\n";
        csv += "q," + std::to_string(bundle.at("q").get<std::size_t>()) + "\n";
        csv += "expected_sensitivity," +
               format3(summary.at("expected_sensitivity").get<double>()) + "\n";
        csv += "sensitivity_std," +
               format3(summary.at("sensitivity_stats").at("std").get<double>()) + "\n";
        if (!summary.at("consistency").is_null()) {
            csv += "consistency," + format3(summary["consistency"].get<double>()) + "\n";
            csv += "consistency_std," +
                   format3(summary.at("consistency_stats").at("std").get<double>()) + "\n";
        }
        if (has_gold) {
            csv += "micro_f1_mean," + format3(summary.at("micro_f1_mean").get<double>()) + "\n";
            csv += "micro_f1_std," +
                   format3(summary.at("micro_f1_stats").at("std").get<double>()) + "\n";
        }
        if (!summary.at("pearson").at("value").is_null()) {
            csv += "pearson_filtered," +
                   format3(summary["pearson"]["value"].get<double>()) + "\n";
        }
        write_file(out_dir / "summary.csv", csv);
    }

    {
        std::string csv = "sample_id,sensitivity,avg_consistency,exceeds_unit\n";
        for (const auto& row : bundle.at("per_sample")) {
            csv += csv_quote(row.at("id").get<std::string>()) + ",";
            csv += full(row.at("sensitivity").get<double>()) + ",";
            csv += row.at("avg_consistency").is_null()
                       ? ""
                       : full(row["avg_consistency"].get<double>());
            csv += row.at("exceeds_unit").get<bool>() ? ",1\n" : ",0\n";
        }
        write_file(out_dir / "per_sample.csv", csv);
    }

    if (!bundle.at("per_class").empty()) {
        std::string csv = "label,count,mean_sensitivity,consistency,consistency_offdiag,estimated\n";
        for (const auto& entry : bundle["per_class"]) {
            csv += csv_quote(entry.at("label").get<std::string>()) + ",";
            csv += std::to_string(entry.at("count").get<std::size_t>()) + ",";
            csv += format3(entry.at("mean_sensitivity").get<double>()) + ",";
            csv += format3(entry.at("consistency_expected").get<double>()) + ",";
            csv += entry.at("consistency_offdiag").is_null()
                       ? ""
                       : format3(entry["consistency_offdiag"].get<double>());
            csv += entry.value("estimated", false) ? ",1\n" : ",0\n";
        }
        write_file(out_dir / "per_class.csv", csv);

        for (const auto& entry : bundle["per_class"]) {
            const std::string stem = sanitize_filename(entry.at("label").get<std::string>());
            if (entry.contains("histogram")) {
                const auto& counts = entry["histogram"].at("counts");
                const std::size_t bins = counts.size();
                std::string csv2 = "bin_left,bin_right,count\n";
                for (std::size_t b = 0; b < bins; ++b) {
                    csv2 += full(static_cast<double>(b) / static_cast<double>(bins)) + ",";
                    csv2 += full(static_cast<double>(b + 1) / static_cast<double>(bins)) + ",";
                    csv2 += std::to_string(counts[b].get<std::size_t>()) + "\n";
                }
                write_file(out_dir / ("consistency_histogram_" + stem + ".csv"), csv2);
            }
            if (!entry.at("matrix").is_null()) {
                std::string csv2;
                for (const auto& row : entry["matrix"]) {
                    for (std::size_t j = 0; j < row.size(); ++j) {
                        if (j) csv2 += ',';
                        csv2 += full(row[j].get<double>());
                    }
                    csv2 += '\n';
                }
                write_file(out_dir / ("consistency_matrix_" + stem + ".csv"), csv2);
            }
        }
    }

    if (has_gold) {
        std::string csv = "rephrasing_index,micro_f1\n";
        const auto& values = bundle.at("micro_f1").at("per_rephrasing");
        for (std::size_t k = 0; k < values.size(); ++k) {
            csv += std::to_string(k) + "," + full(values[k].get<double>()) + "\n";
        }
        write_file(out_dir / "micro_f1.csv", csv);
    }

    {
        std::string csv = "sample_id,sensitivity\n";
        for (const auto& row : bundle.at("per_sample")) {
            csv += csv_quote(row.at("id").get<std::string>()) + "," +
                   full(row.at("sensitivity").get<double>()) + "\n";
        }
        write_file(out_dir / "sensitivity_values.csv", csv);
    }

    {
        std::string csv = "rank,sample_id,sensitivity,correct_count,gold_label,excerpt\n";
        std::size_t rank = 1;
        for (const auto& entry : bundle.at("triage").at("sensitive")) {
            csv += std::to_string(rank++) + ",";
            csv += csv_quote(entry.at("sample_id").get<std::string>()) + ",";
            csv += format3(entry.at("sensitivity").get<double>()) + ",";
            csv += entry.at("correct_count").is_null()
                       ? ""
                       : std::to_string(entry["correct_count"].get<std::size_t>());
            csv += ",";
            csv += entry.at("gold_label").is_null()
                       ? ""
                       : csv_quote(entry["gold_label"].get<std::string>());
            csv += ",";
            csv += entry.at("excerpt").is_null() ? ""
                                                 : csv_quote(entry["excerpt"].get<std::string>());
            csv += "\n";
        }
        write_file(out_dir / "triage_sensitive.csv", csv);
    }

    for (const auto& [label, entries] : bundle.at("triage").at("inconsistent").items()) {
        std::string csv = "rank,sample_id,sensitivity,avg_consistency,correct_count,excerpt\n";
        std::size_t rank = 1;
        for (const auto& entry : entries) {
            csv += std::to_string(rank++) + ",";
            csv += csv_quote(entry.at("sample_id").get<std::string>()) + ",";
            csv += format3(entry.at("sensitivity").get<double>()) + ",";
            csv += format3(entry.at("avg_consistency").get<double>()) + ",";
            csv += entry.at("correct_count").is_null()
                       ? ""
                       : std::to_string(entry["correct_count"].get<std::size_t>());
            csv += ",";
            csv += entry.at("excerpt").is_null() ? ""
                                                 : csv_quote(entry["excerpt"].get<std::string>());
            csv += "\n";
        }
        write_file(out_dir / ("triage_inconsistent_" + sanitize_filename(label) + ".csv"), csv);
    }
}

}  // namespace promptgauge
