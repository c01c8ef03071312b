#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptgauge/errors.hpp"
#include "promptgauge/gateway.hpp"
#include "promptgauge/task_spec.hpp"

namespace promptgauge {

struct RephrasingProvenance {
    std::string sampler;  // sampler identity, e.g. "stub" or "llm"
    std::string model;    // backing model when applicable
    std::map<std::string, std::string> params;
};

// The Q semantically-equivalent task descriptions. Entry 0 is always the
// original description.
struct RephrasingSet {
    std::string base;
    std::vector<std::string> rephrasings;
    RephrasingProvenance provenance;

    std::size_t q() const { return rephrasings.size(); }
};

class RephrasingSampler {
public:
    virtual ~RephrasingSampler() = default;
    virtual std::string name() const = 0;
    // One candidate rephrasing. `variant` is the 1-based slot being filled;
    // `attempt` restarts at 0 on each duplicate retry of that slot.
    virtual std::string sample(const std::string& base, std::size_t variant,
                               std::size_t attempt) = 0;
    virtual RephrasingProvenance provenance() const = 0;
};

// Deterministic offline sampler: "<base> (variant k)".
class StubSampler final : public RephrasingSampler {
public:
    std::string name() const override { return "stub"; }
    std::string sample(const std::string& base, std::size_t variant,
                       std::size_t attempt) override;
    RephrasingProvenance provenance() const override;
};

inline constexpr const char* kDefaultMetaPrompt =
    "Rewrite the task description below so that it keeps exactly the same meaning. "
    "You may change its length or add unnecessary words, but do not change what it asks for. "
    "Reply with the rewritten description only, without quotes or commentary.";

// LLM-backed sampler: drives any Classifier with a meta-prompt. The variant
// number is embedded so temperature-0 endpoints still produce distinct outputs.
class LlmSampler final : public RephrasingSampler {
public:
    explicit LlmSampler(Classifier& llm, std::string meta_prompt = kDefaultMetaPrompt);

    std::string name() const override { return "llm"; }
    std::string sample(const std::string& base, std::size_t variant,
                       std::size_t attempt) override;
    RephrasingProvenance provenance() const override;

private:
    Classifier& llm_;
    std::string meta_prompt_;
};

// Raised when the sampler keeps failing for one slot; carries what was
// generated so far so an expensive partial result is not lost.
class SamplerExhaustedError : public Error {
public:
    SamplerExhaustedError(const std::string& what, RephrasingSet partial)
        : Error(what), partial_(std::move(partial)) {}
    const RephrasingSet& partial() const { return partial_; }

private:
    RephrasingSet partial_;
};

struct GenerateOptions {
    std::size_t duplicate_retries = 3;  // per slot, after which the duplicate is kept with a warning
    std::size_t failure_retries = 2;    // sampler exceptions tolerated per slot
};

// rho_0 followed by q-1 sampler outputs. Duplicate outputs (after whitespace
// normalization) are retried, then accepted with a warning; persistent sampler
// failures raise SamplerExhaustedError with the partial set attached.
RephrasingSet generate_rephrasings(const TaskSpec& spec, std::size_t q,
                                   RephrasingSampler& sampler,
                                   const GenerateOptions& options = {},
                                   std::vector<std::string>* warnings = nullptr);

// Soft checks guarding the assumption that entries are equivalent restatements:
// empty entries, duplicates, entries dropping every label name the base
// mentions, entries far longer than the base.
std::vector<std::string> validate_rephrasing_set(const RephrasingSet& set, const TaskSpec& spec,
                                                 double max_length_ratio = 5.0);

nlohmann::json rephrasing_set_to_json(const RephrasingSet& set);
RephrasingSet rephrasing_set_from_json(const nlohmann::json& doc);
void save_rephrasing_set(const RephrasingSet& set, const std::filesystem::path& path);
RephrasingSet load_rephrasing_set(const std::filesystem::path& path);

}  // namespace promptgauge
