#include "promptgauge/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "promptgauge/errors.hpp"
#include "promptgauge/rephrasing.hpp"

namespace promptgauge {

namespace {

using nlohmann::json;

std::map<std::string, std::string> string_map(const json& obj) {
    std::map<std::string, std::string> out;
    for (const auto& [key, value] : obj.items()) out[key] = value.get<std::string>();
    return out;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot open config file: " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ParseError("config file is not valid JSON");
    if (!doc.is_object() || !doc.contains("task")) {
        throw ParseError("config needs a 'task' object");
    }

    RunConfig config;
    const json& task = doc["task"];
    if (!task.contains("base_description") || !task.contains("labels")) {
        throw ParseError("config task needs 'base_description' and 'labels'");
    }
    config.task.base_description = task["base_description"].get<std::string>();
    config.task.labels = task["labels"].get<std::vector<std::string>>();
    if (task.contains("label_descriptions")) {
        config.task.label_descriptions = string_map(task["label_descriptions"]);
    }
    if (task.contains("exemplars")) {
        config.task.exemplars = string_map(task["exemplars"]);
    }
    if (task.contains("answer_instruction")) {
        config.task.answer_instruction = task["answer_instruction"].get<std::string>();
    }

    config.strategy = strategy_from_string(doc.value("strategy", std::string("simple")));
    config.q = doc.value("q", std::size_t{30});
    if (config.q < 1) throw ValidationError("config q must be at least 1");

    if (doc.contains("endpoint")) {
        const json& ep = doc["endpoint"];
        config.endpoint.kind = ep.value("kind", std::string("openai"));
        if (config.endpoint.kind != "openai" && config.endpoint.kind != "mock") {
            throw ValidationError("endpoint kind must be 'openai' or 'mock'");
        }
        ModelEndpoint& endpoint = config.endpoint.endpoint;
        endpoint.base_url = ep.value("base_url", std::string());
        endpoint.model_name = ep.value("model", std::string());
        endpoint.api_key_env = ep.value("api_key_env", std::string());
        endpoint.temperature = ep.value("temperature", 0.0);
        if (ep.contains("seed") && !ep["seed"].is_null()) {
            endpoint.seed = ep["seed"].get<std::int64_t>();
        } else if (ep.contains("seed")) {
            endpoint.seed = std::nullopt;
        }
        endpoint.timeout_s = ep.value("timeout_s", 60);
        endpoint.max_retries = ep.value("max_retries", 3);
        endpoint.initial_backoff_ms = ep.value("initial_backoff_ms", 500);
        if (endpoint.temperature < 0.0) {
            throw ValidationError("endpoint temperature must be non-negative");
        }
        if (ep.contains("mock")) {
            const json& mock = ep["mock"];
            config.endpoint.mock.mode = mock.value("mode", std::string("hash"));
            config.endpoint.mock.name = mock.value("name", std::string("mock"));
            config.endpoint.mock.default_response =
                mock.value("default_response", std::string());
            if (mock.contains("script")) {
                config.endpoint.mock.script = string_map(mock["script"]);
            }
        }
    }

    if (doc.contains("sampler")) {
        const json& sampler = doc["sampler"];
        config.sampler_kind = sampler.value("kind", std::string("stub"));
        if (config.sampler_kind != "stub" && config.sampler_kind != "llm") {
            throw ValidationError("sampler kind must be 'stub' or 'llm'");
        }
        config.meta_prompt = sampler.value("meta_prompt", std::string());
    }

    if (doc.contains("perturbation")) {
        const json& pert = doc["perturbation"];
        config.perturbation.swap_probability = pert.value("swap_probability", 0.5);
        config.perturbation.rng_seed = pert.value("seed", std::uint64_t{42});
    }

    if (doc.contains("metrics")) {
        const json& metrics = doc["metrics"];
        MetricsOptions& options = config.report.metrics;
        options.na_in_denominator = metrics.value("na_in_denominator", false);
        options.pearson_threshold = metrics.value("pearson_threshold", 0.05);
        options.class_size_cap = metrics.value("class_size_cap", std::size_t{2000});
        options.subsample_seed = metrics.value("subsample_seed", std::uint64_t{42});
    }

    if (doc.contains("report")) {
        const json& report = doc["report"];
        config.report.histogram_bins = report.value("histogram_bins", std::size_t{10});
        config.report.triage_k = report.value("triage_k", std::size_t{10});
        config.report.triage_min_sensitivity = report.value("triage_min_sensitivity", 0.0);
        config.report.matrix_output_limit =
            report.value("matrix_output_limit", std::size_t{200});
        config.report.excerpt_length = report.value("excerpt_length", std::size_t{80});
    }

    config.dataset_path = doc.value("dataset", std::string());
    return config;
}

std::unique_ptr<Classifier> make_classifier(const EndpointConfig& config,
                                            const std::vector<std::string>& labels) {
    if (config.kind == "openai") {
        if (config.endpoint.base_url.empty()) {
            throw ValidationError("openai endpoint needs a base_url");
        }
        return std::make_unique<HttpClassifier>(config.endpoint);
    }

    const MockConfig& mock = config.mock;
    if (mock.mode == "fixed") {
        return std::make_unique<MockClassifier>(
            MockClassifier::fixed(mock.default_response, mock.name));
    }
    if (mock.mode == "scripted") {
        return std::make_unique<MockClassifier>(mock.script, mock.default_response, mock.name);
    }
    if (mock.mode == "hash") {
        return std::make_unique<MockClassifier>(MockClassifier::hash_pick(labels, mock.name));
    }
    throw ValidationError("unknown mock mode: " + mock.mode);
}

}  // namespace promptgauge
