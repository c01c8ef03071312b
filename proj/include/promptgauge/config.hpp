#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "promptgauge/baselines.hpp"
#include "promptgauge/gateway.hpp"
#include "promptgauge/report.hpp"
#include "promptgauge/task_spec.hpp"

namespace promptgauge {

struct MockConfig {
    std::string mode = "hash";  // hash | fixed | scripted
    std::string name = "mock";
    std::string default_response;
    std::map<std::string, std::string> script;  // prompt digest -> response
};

struct EndpointConfig {
    std::string kind = "openai";  // openai | mock
    ModelEndpoint endpoint;
    MockConfig mock;
};

// One config document covers the task, strategy, endpoint, sampler,
// perturbation and metric knobs; CLI flags override individual values.
struct RunConfig {
    TaskSpec task;
    PromptStrategy strategy = PromptStrategy::simple;
    std::size_t q = 30;
    EndpointConfig endpoint;
    std::string sampler_kind = "stub";  // stub | llm
    std::string meta_prompt;
    PerturbationConfig perturbation;
    ReportOptions report;  // carries MetricsOptions
    std::string dataset_path;
};

RunConfig load_config(const std::filesystem::path& path);

// `labels` feeds the hash-pick mock; ignored for the other kinds.
std::unique_ptr<Classifier> make_classifier(const EndpointConfig& config,
                                            const std::vector<std::string>& labels);

}  // namespace promptgauge
