#include "promptgauge/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "promptgauge/digest.hpp"
#include "promptgauge/errors.hpp"
#include "promptgauge/prompt_builder.hpp"
#include "promptgauge/version.hpp"

namespace promptgauge {

namespace {

using nlohmann::json;

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

json task_to_json(const TaskSpec& task) {
    json descriptions = json::object();
    for (const auto& [label, text] : task.label_descriptions) descriptions[label] = text;
    json exemplars = json::object();
    for (const auto& [label, text] : task.exemplars) exemplars[label] = text;
    return json{
        {"base_description", task.base_description},
        {"labels", task.labels},
        {"label_descriptions", descriptions},
        {"exemplars", exemplars},
        {"answer_instruction", task.answer_instruction},
    };
}

std::string compute_run_id(const TaskSpec& task, PromptStrategy strategy,
                           const RephrasingSet& rephrasings, const std::string& dataset_digest,
                           const CacheIdentity& identity, std::size_t n, std::size_t q) {
    std::string canonical = "task=" + sha256_hex(task_to_json(task).dump());
    canonical += "|strategy=" + to_string(strategy);
    canonical += "|rephrasings=" + sha256_hex(rephrasing_set_to_json(rephrasings).dump());
    canonical += "|dataset=" + dataset_digest;
    canonical += "|model=" + identity.model_name;
    char temperature[64];
    std::snprintf(temperature, sizeof(temperature), "%.17g", identity.temperature);
    canonical += "|temperature=" + std::string(temperature);
    canonical += "|seed=" + (identity.seed ? std::to_string(*identity.seed) : std::string("none"));
    canonical += "|n=" + std::to_string(n) + "|q=" + std::to_string(q);
    return sha256_hex(canonical);
}

}  // namespace

json manifest_to_json(const RunManifest& manifest) {
    return json{
        {"version", 1},
        {"run_id", manifest.run_id},
        {"toolkit_version", manifest.toolkit_version},
        {"task", task_to_json(manifest.task)},
        {"strategy", manifest.strategy},
        {"rephrasings", rephrasing_set_to_json(manifest.rephrasings)},
        {"dataset", {{"path", manifest.dataset_path}, {"digest", manifest.dataset_digest}}},
        {"n", manifest.n},
        {"q", manifest.q},
        {"endpoint",
         {{"model", manifest.model_name},
          {"temperature", manifest.temperature},
          {"seed", manifest.seed ? json(*manifest.seed) : json(nullptr)},
          {"base_url", manifest.base_url}}},
        {"started_at", manifest.started_at},
        {"finished_at", manifest.finished_at},
        {"stats",
         {{"cells_total", manifest.stats.cells_total},
          {"cells_completed", manifest.stats.cells_completed},
          {"cache_hits", manifest.stats.cache_hits},
          {"classifier_calls", manifest.stats.classifier_calls}}},
        {"warnings", manifest.warnings},
    };
}

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw StorageError("cannot write manifest to " + path.string());
    out << manifest_to_json(manifest).dump(2) << '\n';
}

RunResult run_experiment(const TaskSpec& spec, PromptStrategy strategy,
                         const RephrasingSet& rephrasings,
                         const std::vector<DatasetSample>& dataset, Classifier& classifier,
                         ResponseCache& cache, const RunOptions& options) {
    validate_for_strategy(spec, strategy);
    if (dataset.empty()) throw InvalidInputError("dataset is empty");
    if (rephrasings.rephrasings.empty()) throw InvalidInputError("rephrasing set is empty");
    if (options.concurrency < 1) throw InvalidInputError("concurrency must be at least 1");

    // The N/A fallback slot is always live for experiment tables: the parse
    // cascade can produce it for any response.
    const ClassSpace space = class_space_of(spec, true);

    const std::size_t n = dataset.size();
    const std::size_t q = rephrasings.q();

    std::size_t gold_count = 0;
    std::unordered_set<std::string> ids;
    for (const auto& sample : dataset) {
        if (!ids.insert(sample.id).second) {
            throw ValidationError("duplicate sample id: " + sample.id);
        }
        if (sample.gold) {
            if (!space.index_of(*sample.gold)) {
                throw ValidationError("gold label '" + *sample.gold + "' is not a task label");
            }
            ++gold_count;
        }
    }
    if (gold_count != 0 && gold_count != n) {
        throw ValidationError("dataset mixes labeled and unlabeled samples");
    }

    PredictionTable table;
    table.q = q;
    table.sample_ids.reserve(n);
    for (const auto& sample : dataset) table.sample_ids.push_back(sample.id);
    if (gold_count == n) {
        std::vector<std::size_t> gold;
        gold.reserve(n);
        for (const auto& sample : dataset) gold.push_back(*space.index_of(*sample.gold));
        table.gold_labels = std::move(gold);
    }
    table.cells.assign(n, std::vector<Outcome>(q, Outcome::na()));

    const CacheIdentity identity = classifier.cache_identity();
    const std::string ds_digest = dataset_digest(dataset);

    RunManifest manifest;
    manifest.run_id = compute_run_id(spec, strategy, rephrasings, ds_digest, identity, n, q);
    manifest.toolkit_version = kToolkitVersion;
    manifest.task = spec;
    manifest.strategy = to_string(strategy);
    manifest.rephrasings = rephrasings;
    manifest.dataset_path = options.dataset_path;
    manifest.dataset_digest = ds_digest;
    manifest.n = n;
    manifest.q = q;
    manifest.model_name = identity.model_name;
    manifest.temperature = identity.temperature;
    manifest.seed = identity.seed;
    if (auto* http = dynamic_cast<HttpClassifier*>(&classifier)) {
        manifest.base_url = http->endpoint().base_url;
    }
    manifest.started_at = utc_timestamp();

    RunStats stats;
    stats.cells_total = n * q;

    // Phase 1: build prompts/keys and satisfy every cell the cache already
    // holds; the leftovers form the work list.
    std::vector<std::string> prompts(n * q);
    std::vector<std::string> keys(n * q);
    std::vector<std::size_t> work;
    std::mutex progress_mutex;
    bool abort_requested = false;
    std::optional<std::string> abort_reason;

    const auto report_progress = [&](std::size_t done) {
        if (!options.progress) return;
        std::lock_guard lock(progress_mutex);
        if (!options.progress(done, stats.cells_total)) abort_requested = true;
    };

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < q; ++k) {
            const std::size_t cell = i * q + k;
            prompts[cell] =
                build_prompt(spec, strategy, rephrasings.rephrasings[k], dataset[i].text);
            keys[cell] = cache_key(
                CacheKeyFields{identity.model_name, identity.temperature, identity.seed,
                               prompts[cell]});
            if (auto raw = cache.lookup(keys[cell])) {
                table.cells[i][k] = parse_label(*raw, space).outcome;
                ++stats.cache_hits;
                ++stats.cells_completed;
                report_progress(stats.cells_completed);
            } else {
                work.push_back(cell);
            }
        }
    }

    std::size_t scheduled = work.size();
    if (options.max_cells && *options.max_cells < scheduled) {
        scheduled = *options.max_cells;
        abort_reason = "cell budget of " + std::to_string(*options.max_cells) + " reached";
    }

    // Phase 2: bounded worker pool over the scheduled work items.
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> calls{0};
    std::atomic<std::size_t> completed_new{0};
    std::atomic<bool> stop{abort_requested};
    std::mutex error_mutex;
    std::optional<std::string> worker_error;

    const auto worker = [&]() {
        while (!stop.load(std::memory_order_relaxed)) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= scheduled) return;
            const std::size_t cell = work[slot];
            const std::size_t i = cell / q;
            const std::size_t k = cell % q;
            try {
                const std::string raw = classifier.classify(prompts[cell]);
                calls.fetch_add(1);
                cache.store(keys[cell],
                            CacheKeyFields{identity.model_name, identity.temperature,
                                           identity.seed, prompts[cell]},
                            raw);
                table.cells[i][k] = parse_label(raw, space).outcome;
                const std::size_t done_new = completed_new.fetch_add(1) + 1;
                {
                    std::lock_guard lock(progress_mutex);
                    if (options.progress &&
                        !options.progress(stats.cells_completed + done_new, stats.cells_total)) {
                        stop.store(true);
                    }
                }
            } catch (const Error& e) {
                stop.store(true);
                std::lock_guard lock(error_mutex);
                if (!worker_error) worker_error = e.what();
                return;
            }
        }
    };

    const std::size_t thread_count =
        std::min<std::size_t>(static_cast<std::size_t>(options.concurrency),
                              std::max<std::size_t>(scheduled, 1));
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();

    stats.classifier_calls = calls.load();
    stats.cells_completed += completed_new.load();

    // Anything the pool never filled is a gap; re-probe the cache so a cell
    // that finished right before an abort is not misreported.
    for (std::size_t slot = 0; slot < work.size(); ++slot) {
        const std::size_t cell = work[slot];
        const std::size_t i = cell / q;
        const std::size_t k = cell % q;
        if (slot >= scheduled || !cache.contains(keys[cell])) {
            table.gaps.emplace_back(i, k);
        } else if (auto raw = cache.lookup(keys[cell])) {
            table.cells[i][k] = parse_label(*raw, space).outcome;
        }
    }

    if (worker_error) {
        abort_reason = "classifier failure: " + *worker_error;
    } else if (abort_requested || (stop.load() && !abort_reason)) {
        abort_reason = abort_reason ? abort_reason : std::optional<std::string>("aborted by caller");
    }
    if (!table.gaps.empty() && !abort_reason) {
        abort_reason = "run stopped early";
    }

    manifest.finished_at = utc_timestamp();
    manifest.stats = stats;

    RunResult result;
    result.table = std::move(table);
    result.manifest = std::move(manifest);
    result.stats = stats;
    result.abort_reason = result.table.gaps.empty() ? std::nullopt : abort_reason;
    return result;
}

}  // namespace promptgauge
