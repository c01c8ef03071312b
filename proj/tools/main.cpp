// promptgauge: prompt-robustness diagnostics for black-box text classifiers.
//
// Pipeline: rephrase -> run -> metrics -> report, plus triage rankings and
// noisy/random comparison baselines. See README.md for the config schema.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "promptgauge/baselines.hpp"
#include "promptgauge/cache.hpp"
#include "promptgauge/config.hpp"
#include "promptgauge/errors.hpp"
#include "promptgauge/report.hpp"
#include "promptgauge/runner.hpp"
#include "promptgauge/table_io.hpp"
#include "promptgauge/triage.hpp"
#include "promptgauge/version.hpp"

namespace pg = promptgauge;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitTransport = 2;
constexpr int kExitPartialRun = 3;

struct GlobalArgs {
    std::string config_path;
    std::string cache_dir = "cache";
    std::uint64_t seed = 42;
    std::string out;
};

pg::RunConfig require_config(const GlobalArgs& args) {
    if (args.config_path.empty()) {
        throw pg::ValidationError("this command needs --config");
    }
    return pg::load_config(args.config_path);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw pg::StorageError("cannot open " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw pg::ParseError(path + " is not valid JSON");
    return doc;
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw pg::StorageError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw pg::StorageError("short write on " + path.string());
}

void print_triage(const pg::TriageList& list, std::size_t q, bool show_consistency) {
    for (const auto& notice : list.notices) std::cout << "note: " << notice << "\n";
    for (const auto& entry : list.entries) {
        std::cout << "(" << pg::format3(entry.sensitivity) << ") ";
        if (show_consistency && entry.avg_consistency) {
            std::cout << "(" << pg::format3(*entry.avg_consistency) << ") ";
        }
        std::cout << entry.sample_id;
        if (entry.correct_count) {
            std::cout << " [" << *entry.correct_count << "/" << q << " correct]";
        }
        if (!entry.excerpt.empty()) std::cout << " " << entry.excerpt;
        std::cout << "\n";
    }
}

void write_triage_csv(const pg::TriageList& list, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw pg::StorageError("cannot write " + path.string());
    out << "rank,sample_id,sensitivity,avg_consistency,correct_count,gold_label\n";
    std::size_t rank = 1;
    for (const auto& entry : list.entries) {
        out << rank++ << ',' << entry.sample_id << ',' << pg::format3(entry.sensitivity) << ',';
        if (entry.avg_consistency) out << pg::format3(*entry.avg_consistency);
        out << ',';
        if (entry.correct_count) out << *entry.correct_count;
        out << ',';
        if (entry.gold_label) out << *entry.gold_label;
        out << '\n';
    }
}

int cmd_rephrase(const GlobalArgs& globals, std::optional<std::size_t> q_override,
                 const std::string& out_path) {
    pg::RunConfig config = require_config(globals);
    const std::size_t q = q_override.value_or(config.q);

    std::unique_ptr<pg::Classifier> classifier;
    std::unique_ptr<pg::RephrasingSampler> sampler;
    if (config.sampler_kind == "llm") {
        classifier = pg::make_classifier(config.endpoint, config.task.labels);
        sampler = std::make_unique<pg::LlmSampler>(
            *classifier,
            config.meta_prompt.empty() ? pg::kDefaultMetaPrompt : config.meta_prompt);
    } else {
        sampler = std::make_unique<pg::StubSampler>();
    }

    std::vector<std::string> warnings;
    pg::RephrasingSet set = pg::generate_rephrasings(config.task, q, *sampler, {}, &warnings);
    for (const auto& warning : pg::validate_rephrasing_set(set, config.task)) {
        warnings.push_back(warning);
    }
    for (const auto& warning : warnings) std::cerr << "warning: " << warning << "\n";

    const std::string path = out_path.empty() ? "rephrasings.json" : out_path;
    pg::save_rephrasing_set(set, path);
    std::cout << "wrote " << set.q() << " rephrasings to " << path << "\n";
    return kExitOk;
}

int cmd_run(const GlobalArgs& globals, const std::string& rephrasings_path,
            std::string dataset_path, const std::string& out_dir, int concurrency,
            std::optional<std::size_t> max_cells, bool quiet) {
    pg::RunConfig config = require_config(globals);
    if (dataset_path.empty()) dataset_path = config.dataset_path;
    if (dataset_path.empty()) {
        throw pg::ValidationError("no dataset given (flag --dataset or config 'dataset')");
    }

    const pg::RephrasingSet rephrasings = pg::load_rephrasing_set(rephrasings_path);
    const auto dataset = pg::ingest_dataset(dataset_path, config.task.labels);
    auto classifier = pg::make_classifier(config.endpoint, config.task.labels);
    pg::ResponseCache cache(globals.cache_dir);

    pg::RunOptions options;
    options.concurrency = concurrency;
    options.max_cells = max_cells;
    options.dataset_path = dataset_path;
    if (!quiet) {
        options.progress = [](std::size_t done, std::size_t total) {
            if (done % 100 == 0 || done == total) {
                std::fprintf(stderr, "\r%zu/%zu cells", done, total);
                if (done == total) std::fprintf(stderr, "\n");
                std::fflush(stderr);
            }
            return true;
        };
    }

    pg::RunResult result = pg::run_experiment(config.task, config.strategy, rephrasings, dataset,
                                              *classifier, cache, options);
    result.manifest.warnings = pg::validate_rephrasing_set(rephrasings, config.task);
    for (const auto& warning : result.manifest.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }

    const std::filesystem::path dir = out_dir.empty() ? "run_out" : out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw pg::StorageError("cannot create output directory " + dir.string());

    const pg::ClassSpace space = pg::class_space_of(config.task, true);
    pg::export_table(result.table, space, result.manifest.run_id, dir / "table.json");
    pg::save_manifest(result.manifest, dir / "manifest.json");

    std::cout << "run " << result.manifest.run_id.substr(0, 12) << ": "
              << result.stats.cells_completed << "/" << result.stats.cells_total << " cells, "
              << result.stats.classifier_calls << " classifier calls, " << result.stats.cache_hits
              << " cache hits\n";
    if (!result.complete()) {
        std::cout << "partial run persisted (" << result.table.gaps.size()
                  << " gaps): " << result.abort_reason.value_or("unknown reason") << "\n";
        return kExitPartialRun;
    }
    return kExitOk;
}

int cmd_metrics(const GlobalArgs& globals, const std::string& table_path,
                const std::string& dataset_path, const std::string& manifest_path,
                const std::string& out_dir) {
    pg::LoadedTable loaded = pg::load_table(table_path);

    pg::ReportOptions options;
    if (!globals.config_path.empty()) {
        options = pg::load_config(globals.config_path).report;
    }

    std::vector<pg::DatasetSample> dataset;
    const std::vector<pg::DatasetSample>* dataset_ptr = nullptr;
    if (!dataset_path.empty()) {
        dataset = pg::ingest_dataset(dataset_path, loaded.space.labels());
        dataset_ptr = &dataset;
    }

    std::string strategy, model;
    if (!manifest_path.empty()) {
        const json manifest = read_json_file(manifest_path);
        strategy = manifest.value("strategy", std::string());
        if (manifest.contains("endpoint")) {
            model = manifest["endpoint"].value("model", std::string());
        }
    }

    const pg::ReportBundle bundle = pg::build_report_bundle(
        loaded.table, loaded.space, loaded.manifest_ref, options, dataset_ptr, strategy, model);
    const json doc = pg::bundle_to_json(bundle);

    const std::filesystem::path dir = out_dir.empty() ? "report_out" : out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw pg::StorageError("cannot create output directory " + dir.string());
    write_json_file(doc, dir / "report.json");
    pg::render_report_files(doc, dir);

    const json& summary = doc["summary"];
    if (!summary["cell"].is_null()) {
        std::cout << "sensitivity/consistency/micro-f1: " << summary["cell"].get<std::string>()
                  << "\n";
    } else {
        std::cout << "expected sensitivity: "
                  << pg::format3(summary["expected_sensitivity"].get<double>()) << "\n";
    }
    std::cout << "report written to " << (dir / "report.json").string() << "\n";
    return kExitOk;
}

int cmd_report(const std::string& bundle_path, const std::string& out_dir, bool no_csv) {
    const json doc = read_json_file(bundle_path);
    const std::filesystem::path dir = out_dir.empty() ? "report_out" : out_dir;
    pg::render_report_files(doc, dir, true, !no_csv);
    std::cout << "rendered report files in " << dir.string() << "\n";
    return kExitOk;
}

int cmd_triage_sensitive(const GlobalArgs& globals, const std::string& table_path, std::size_t k,
                         const std::string& dataset_path) {
    pg::LoadedTable loaded = pg::load_table(table_path);
    pg::MetricsOptions options;
    if (!globals.config_path.empty()) {
        options = pg::load_config(globals.config_path).report.metrics;
    }
    pg::TriageList list = pg::rank_sensitive(loaded.table, loaded.space, k, options);
    if (!dataset_path.empty()) {
        const auto dataset = pg::ingest_dataset(dataset_path, loaded.space.labels());
        for (auto& entry : list.entries) {
            for (const auto& sample : dataset) {
                if (sample.id == entry.sample_id) entry.excerpt = sample.text;
            }
        }
    }
    print_triage(list, loaded.table.q, false);
    if (!globals.out.empty()) write_triage_csv(list, globals.out);
    return kExitOk;
}

int cmd_triage_inconsistent(const GlobalArgs& globals, const std::string& table_path,
                            const std::string& class_label, std::size_t k,
                            double min_sensitivity, const std::string& dataset_path) {
    pg::LoadedTable loaded = pg::load_table(table_path);
    pg::MetricsOptions options;
    if (!globals.config_path.empty()) {
        options = pg::load_config(globals.config_path).report.metrics;
    }
    pg::TriageList list =
        pg::rank_inconsistent(loaded.table, loaded.space, class_label, k, min_sensitivity, options);
    if (!dataset_path.empty()) {
        const auto dataset = pg::ingest_dataset(dataset_path, loaded.space.labels());
        for (auto& entry : list.entries) {
            for (const auto& sample : dataset) {
                if (sample.id == entry.sample_id) entry.excerpt = sample.text;
            }
        }
    }
    print_triage(list, loaded.table.q, true);
    if (!globals.out.empty()) write_triage_csv(list, globals.out);
    return kExitOk;
}

// Perturbation defaults come from the config when present; explicit flags win.
pg::PerturbationConfig resolve_perturbation(const GlobalArgs& globals, bool seed_given,
                                            std::optional<double> swap_probability) {
    pg::PerturbationConfig config;
    if (!globals.config_path.empty()) {
        config = pg::load_config(globals.config_path).perturbation;
    }
    if (seed_given || globals.config_path.empty()) config.rng_seed = globals.seed;
    if (swap_probability) config.swap_probability = *swap_probability;
    return config;
}

int cmd_baseline_noisy(const GlobalArgs& globals, const std::string& table_path, bool seed_given,
                       std::optional<double> swap_probability, const std::string& out_path) {
    pg::LoadedTable loaded = pg::load_table(table_path);
    const pg::PerturbationConfig config =
        resolve_perturbation(globals, seed_given, swap_probability);
    const pg::PredictionTable noisy = pg::perturb_table(loaded.table, loaded.space, config);
    const std::string path = out_path.empty() ? "noisy_table.json" : out_path;
    pg::export_table(noisy, loaded.space, loaded.manifest_ref + ":noisy", path);
    std::cout << "wrote noisy table to " << path << " (swap " << config.swap_probability
              << ", seed " << config.rng_seed << ")\n";
    return kExitOk;
}

int cmd_baseline_random(const GlobalArgs& globals, const std::string& table_path, bool seed_given,
                        const std::string& out_path) {
    pg::LoadedTable loaded = pg::load_table(table_path);
    const pg::PerturbationConfig config = resolve_perturbation(globals, seed_given, std::nullopt);
    const pg::PredictionTable random = pg::random_table(
        loaded.space, loaded.table.sample_ids, loaded.table.gold_labels, loaded.table.q,
        config.rng_seed);
    const std::string path = out_path.empty() ? "random_table.json" : out_path;
    pg::export_table(random, loaded.space, loaded.manifest_ref + ":random", path);
    std::cout << "wrote random table to " << path << " (seed " << config.rng_seed << ")\n";
    return kExitOk;
}

int cmd_baseline_scatter(const GlobalArgs& globals, const std::string& table_path,
                         const std::string& variant, const std::string& out_path) {
    pg::LoadedTable loaded = pg::load_table(table_path);
    pg::MetricsOptions options;
    if (!globals.config_path.empty()) {
        options = pg::load_config(globals.config_path).report.metrics;
    }
    const pg::ScatterResult scatter =
        pg::sensitivity_consistency_scatter(loaded.table, loaded.space, options);
    for (const auto& warning : scatter.warnings) std::cerr << "warning: " << warning << "\n";

    const std::string path = out_path.empty() ? "scatter.csv" : out_path;
    std::ofstream out(path);
    if (!out) throw pg::StorageError("cannot write " + path);
    pg::write_scatter_csv(out, scatter.points, variant);
    std::cout << "wrote " << scatter.points.size() << " scatter points to " << path << "\n";
    return kExitOk;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"prompt-robustness diagnostics for black-box text classifiers"};
    app.set_version_flag("--version", pg::kToolkitVersion);
    app.require_subcommand(1);
    // Let global flags (--config, --out, ...) appear after the subcommand too.
    app.fallthrough();
    app.footer("Exit codes: 0 success, 1 validation error, 2 transport error, "
               "3 partial run persisted.");

    GlobalArgs globals;
    app.add_option("--config", globals.config_path, "config file (task, endpoint, strategy, q)");
    app.add_option("--cache-dir", globals.cache_dir, "response cache directory");
    auto* seed_opt = app.add_option("--seed", globals.seed, "seed for baseline generators");
    app.add_option("--out", globals.out, "output path (meaning depends on the subcommand)");

    auto* rephrase = app.add_subcommand("rephrase", "generate the rephrasing set");
    std::optional<std::size_t> q_override;
    rephrase->add_option("-q,--q", q_override, "number of rephrasings (overrides config)");

    auto* run = app.add_subcommand("run", "fill the N x Q prediction grid");
    std::string rephrasings_path, dataset_path, run_out;
    int concurrency = 8;
    std::optional<std::size_t> max_cells;
    bool quiet = false;
    run->add_option("--rephrasings", rephrasings_path, "rephrasing set JSON")->required();
    run->add_option("--dataset", dataset_path, "JSONL dataset (overrides config)");
    run->add_option("--run-out", run_out, "output directory (table.json, manifest.json)");
    run->add_option("--concurrency", concurrency, "max in-flight classifier requests");
    run->add_option("--max-cells", max_cells, "stop after this many new classifier calls");
    run->add_flag("--quiet", quiet, "suppress progress output");

    auto* metrics = app.add_subcommand("metrics", "compute the metric bundle from a table");
    std::string table_path, metrics_dataset, manifest_path;
    metrics->add_option("--table", table_path, "prediction table JSON")->required();
    metrics->add_option("--dataset", metrics_dataset, "dataset JSONL for text excerpts");
    metrics->add_option("--manifest", manifest_path, "run manifest for context");

    auto* report = app.add_subcommand("report", "re-render text/CSV from a report bundle");
    std::string bundle_path;
    bool no_csv = false;
    report->add_option("--bundle", bundle_path, "report.json produced by 'metrics'")->required();
    report->add_flag("--no-csv", no_csv, "render only report.txt");

    auto* triage = app.add_subcommand("triage", "rank samples for manual prompt fixes");
    triage->require_subcommand(1);
    auto* sensitive = triage->add_subcommand("sensitive", "rank by descending sensitivity");
    std::string triage_table, triage_dataset;
    std::size_t top_k = 10;
    sensitive->add_option("--table", triage_table, "prediction table JSON")->required();
    sensitive->add_option("-k,--top", top_k, "list length");
    sensitive->add_option("--dataset", triage_dataset, "dataset JSONL for sample texts");
    auto* inconsistent =
        triage->add_subcommand("inconsistent", "rank one class by ascending consistency");
    std::string class_label;
    double min_sensitivity = 0.0;
    inconsistent->add_option("--table", triage_table, "prediction table JSON")->required();
    inconsistent->add_option("--class", class_label, "gold class to rank")->required();
    inconsistent->add_option("-k,--top", top_k, "list length");
    inconsistent->add_option("--min-sensitivity", min_sensitivity,
                             "keep samples with sensitivity strictly above this");
    inconsistent->add_option("--dataset", triage_dataset, "dataset JSONL for sample texts");

    auto* baseline = app.add_subcommand("baseline", "noisy / random comparison predictors");
    baseline->require_subcommand(1);
    auto* noisy = baseline->add_subcommand("noisy", "random-swap perturbation of a table");
    std::string baseline_table;
    std::optional<double> swap_probability;
    noisy->add_option("--table", baseline_table, "prediction table JSON")->required();
    noisy->add_option("--swap-probability", swap_probability,
                      "per-cell swap probability (default from config, else 0.5)");
    auto* random = baseline->add_subcommand("random", "uniform random predictor table");
    random->add_option("--table", baseline_table, "table providing ids/gold/Q")->required();
    auto* scatter = baseline->add_subcommand("scatter", "sensitivity vs avg-consistency CSV");
    std::string variant = "original";
    scatter->add_option("--table", baseline_table, "prediction table JSON")->required();
    scatter->add_option("--variant", variant, "variant tag written into the CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (rephrase->parsed()) return cmd_rephrase(globals, q_override, globals.out);
    if (run->parsed()) {
        return cmd_run(globals, rephrasings_path, dataset_path,
                       run_out.empty() ? globals.out : run_out, concurrency, max_cells, quiet);
    }
    if (metrics->parsed()) {
        return cmd_metrics(globals, table_path, metrics_dataset, manifest_path, globals.out);
    }
    if (report->parsed()) return cmd_report(bundle_path, globals.out, no_csv);
    if (sensitive->parsed()) {
        return cmd_triage_sensitive(globals, triage_table, top_k, triage_dataset);
    }
    if (inconsistent->parsed()) {
        return cmd_triage_inconsistent(globals, triage_table, class_label, top_k, min_sensitivity,
                                       triage_dataset);
    }
    if (noisy->parsed()) {
        return cmd_baseline_noisy(globals, baseline_table, seed_opt->count() > 0,
                                  swap_probability, globals.out);
    }
    if (random->parsed()) {
        return cmd_baseline_random(globals, baseline_table, seed_opt->count() > 0, globals.out);
    }
    if (scatter->parsed()) return cmd_baseline_scatter(globals, baseline_table, variant, globals.out);
    return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const pg::TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const pg::ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const pg::SamplerExhaustedError& e) {
        std::cerr << "sampler error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const pg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return kExitValidation;
    }
}
