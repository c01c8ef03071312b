#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptgauge/cache.hpp"
#include "promptgauge/dataset.hpp"
#include "promptgauge/prediction_table.hpp"
#include "promptgauge/rephrasing.hpp"
#include "promptgauge/task_spec.hpp"

namespace promptgauge {

struct RunStats {
    std::size_t cells_total = 0;
    std::size_t cells_completed = 0;
    std::size_t cache_hits = 0;
    std::size_t classifier_calls = 0;
};

// Everything needed to rebuild every prompt of the run byte-identically:
// the task and rephrasings inline, the dataset by content digest. run_id is
// a digest over the prompt-shaping parameters only, so identical runs share
// it regardless of when they executed.
struct RunManifest {
    std::string run_id;
    std::string toolkit_version;
    TaskSpec task;
    std::string strategy;
    RephrasingSet rephrasings;
    std::string dataset_path;  // informational
    std::string dataset_digest;
    std::size_t n = 0;
    std::size_t q = 0;
    std::string model_name;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    std::string base_url;  // informational, not part of run_id
    std::string started_at;
    std::string finished_at;
    RunStats stats;
    std::vector<std::string> warnings;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);
void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);

struct RunOptions {
    int concurrency = 8;
    // Cap on newly issued classifier calls; remaining cells become gaps and
    // the run reports itself aborted. Cached cells do not count.
    std::optional<std::size_t> max_cells;
    // Called once per completed cell (cache hits included); return false to
    // abort. Invoked under a lock, so it may touch shared state freely.
    std::function<bool(std::size_t done, std::size_t total)> progress;
    std::string dataset_path;  // recorded in the manifest
};

struct RunResult {
    PredictionTable table;
    RunManifest manifest;
    RunStats stats;
    std::optional<std::string> abort_reason;  // set when the table has gaps

    bool complete() const { return table.complete(); }
};

// Fills the N x Q grid through the response cache with a bounded worker pool.
// Re-running with a warm cache issues calls only for missing cells; an
// unrecoverable classifier error stops the run and the partial table comes
// back with its gap map instead of being discarded.
RunResult run_experiment(const TaskSpec& spec, PromptStrategy strategy,
                         const RephrasingSet& rephrasings,
                         const std::vector<DatasetSample>& dataset, Classifier& classifier,
                         ResponseCache& cache, const RunOptions& options = {});

}  // namespace promptgauge
