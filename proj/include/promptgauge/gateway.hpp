#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "promptgauge/class_space.hpp"

namespace promptgauge {

// An OpenAI-compatible chat-completions endpoint. Defaults mirror the run
// protocol: temperature 0, seed 42.
struct ModelEndpoint {
    std::string base_url;     // scheme://host[:port][/path-prefix]
    std::string model_name;
    std::string api_key_env;  // name of the env var holding the key; empty = no auth header
    double temperature = 0.0;
    std::optional<std::int64_t> seed = 42;  // omitted from requests when unset
    int timeout_s = 60;
    int max_retries = 3;
    int initial_backoff_ms = 500;  // doubled per retry, capped at 10s
};

enum class ParsePath { exact, normalized, substring, na_fallback };

std::string to_string(ParsePath path);

struct ParsedLabel {
    Outcome outcome = Outcome::na();
    std::string raw_response;
    ParsePath parse_path = ParsePath::na_fallback;
};

// Matching cascade: exact byte match; case-insensitive match after trimming
// whitespace and surrounding punctuation/quotes; unique whole-word substring;
// otherwise N/A. Total and deterministic, never throws.
ParsedLabel parse_label(const std::string& raw, const ClassSpace& space);

// The fields that distinguish cache entries (together with the prompt).
struct CacheIdentity {
    std::string model_name;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
};

class Classifier {
public:
    virtual ~Classifier() = default;
    // Raw response text for one prompt. Throws TransportError / ProtocolError.
    virtual std::string classify(const std::string& prompt) = 0;
    virtual CacheIdentity cache_identity() const = 0;
};

// One chat-completions call with retry/backoff on transient failures
// (connection errors, timeouts, 429 honoring Retry-After, 5xx). Other 4xx
// statuses fail immediately.
std::string classify_once(const ModelEndpoint& endpoint, const std::string& prompt);

class HttpClassifier final : public Classifier {
public:
    explicit HttpClassifier(ModelEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

    std::string classify(const std::string& prompt) override {
        return classify_once(endpoint_, prompt);
    }
    CacheIdentity cache_identity() const override {
        return CacheIdentity{endpoint_.model_name, endpoint_.temperature, endpoint_.seed};
    }
    const ModelEndpoint& endpoint() const { return endpoint_; }

private:
    ModelEndpoint endpoint_;
};

enum class MockMode { scripted, fixed, hash_pick };

// Deterministic offline classifier. scripted: digest-keyed responses with a
// default for unscripted prompts; fixed: one response for everything;
// hash_pick: label chosen by prompt digest (varied but reproducible).
class MockClassifier final : public Classifier {
public:
    MockClassifier(std::map<std::string, std::string> script_by_digest,
                   std::string default_response, std::string name = "mock");

    MockClassifier(MockClassifier&& other) noexcept
        : mode_(other.mode_),
          name_(std::move(other.name_)),
          script_(std::move(other.script_)),
          default_response_(std::move(other.default_response_)),
          labels_(std::move(other.labels_)),
          calls_(other.calls_.load()) {}

    static MockClassifier fixed(std::string response, std::string name = "mock");
    static MockClassifier hash_pick(std::vector<std::string> labels, std::string name = "mock");

    std::string classify(const std::string& prompt) override;
    CacheIdentity cache_identity() const override;

    // Convenience for tests: script by prompt text instead of digest.
    void script_prompt(const std::string& prompt, std::string response);

    std::uint64_t calls() const { return calls_.load(); }
    void reset_calls() { calls_.store(0); }

private:
    explicit MockClassifier(MockMode mode) : mode_(mode) {}

    MockMode mode_;
    std::string name_;
    std::map<std::string, std::string> script_;
    std::string default_response_;
    std::vector<std::string> labels_;
    std::atomic<std::uint64_t> calls_{0};
};

// Spec-level helper: scripted lookup with a configurable default.
std::string mock_classify(const std::map<std::string, std::string>& script_by_digest,
                          const std::string& default_response, const std::string& prompt);

}  // namespace promptgauge
