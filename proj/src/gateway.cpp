#include "promptgauge/gateway.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "promptgauge/digest.hpp"
#include "promptgauge/errors.hpp"

namespace promptgauge {

namespace {

using nlohmann::json;

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_trimmable(unsigned char c) {
    if (std::isspace(c)) return true;
    static const std::string kPunct = "\"'`.,;:!?()[]{}<>*_~-";
    return kPunct.find(static_cast<char>(c)) != std::string::npos;
}

std::string trim_ends(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && is_trimmable(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && is_trimmable(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

bool whole_word_contains(const std::string& haystack_lower, const std::string& needle_lower) {
    std::size_t pos = 0;
    while ((pos = haystack_lower.find(needle_lower, pos)) != std::string::npos) {
        const bool left_ok =
            pos == 0 || !std::isalnum(static_cast<unsigned char>(haystack_lower[pos - 1]));
        const std::size_t after = pos + needle_lower.size();
        const bool right_ok = after == haystack_lower.size() ||
                              !std::isalnum(static_cast<unsigned char>(haystack_lower[after]));
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

// Splits "scheme://host[:port][/prefix]" into the client origin and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw InvalidInputError("endpoint base_url needs a scheme: " + base_url);
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {base_url, ""};
    }
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

bool transient_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

int backoff_ms(const ModelEndpoint& endpoint, int attempt, const httplib::Response* res) {
    if (res && res->has_header("Retry-After")) {
        const std::string value = res->get_header_value("Retry-After");
        char* end = nullptr;
        const long seconds = std::strtol(value.c_str(), &end, 10);
        if (end != value.c_str() && seconds >= 0) {
            return static_cast<int>(std::min<long>(seconds * 1000, 30000));
        }
    }
    const long ms = static_cast<long>(endpoint.initial_backoff_ms) << attempt;
    return static_cast<int>(std::min<long>(ms, 10000));
}

}  // namespace

std::string to_string(ParsePath path) {
    switch (path) {
        case ParsePath::exact: return "exact";
        case ParsePath::normalized: return "normalized";
        case ParsePath::substring: return "substring";
        case ParsePath::na_fallback: return "na_fallback";
    }
    return "na_fallback";
}

ParsedLabel parse_label(const std::string& raw, const ClassSpace& space) {
    for (std::size_t c = 0; c < space.num_labels(); ++c) {
        if (raw == space.label_at(c)) {
            return ParsedLabel{Outcome::label(static_cast<int>(c)), raw, ParsePath::exact};
        }
    }

    const std::string trimmed = lowercase(trim_ends(raw));
    if (!trimmed.empty()) {
        for (std::size_t c = 0; c < space.num_labels(); ++c) {
            if (trimmed == lowercase(space.label_at(c))) {
                return ParsedLabel{Outcome::label(static_cast<int>(c)), raw, ParsePath::normalized};
            }
        }
    }

    const std::string raw_lower = lowercase(raw);
    std::size_t match_count = 0;
    std::size_t match_index = 0;
    for (std::size_t c = 0; c < space.num_labels(); ++c) {
        if (whole_word_contains(raw_lower, lowercase(space.label_at(c)))) {
            ++match_count;
            match_index = c;
        }
    }
    if (match_count == 1) {
        return ParsedLabel{Outcome::label(static_cast<int>(match_index)), raw, ParsePath::substring};
    }

    return ParsedLabel{Outcome::na(), raw, ParsePath::na_fallback};
}

std::string classify_once(const ModelEndpoint& endpoint, const std::string& prompt) {
    if (prompt.empty()) {
        throw InvalidInputError("refusing to classify an empty prompt");
    }
    if (endpoint.model_name.empty()) {
        throw InvalidInputError("endpoint has no model name");
    }

    const auto [origin, prefix] = split_base_url(endpoint.base_url);
    const std::string path = prefix + "/chat/completions";

    json body{
        {"model", endpoint.model_name},
        {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
        {"temperature", endpoint.temperature},
    };
    if (endpoint.seed) body["seed"] = *endpoint.seed;
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!endpoint.api_key_env.empty()) {
        if (const char* key = std::getenv(endpoint.api_key_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    int last_status = 0;
    std::string last_detail = "connection failed";
    for (int attempt = 0; attempt <= endpoint.max_retries; ++attempt) {
        httplib::Client client(origin);
        client.set_connection_timeout(endpoint.timeout_s, 0);
        client.set_read_timeout(endpoint.timeout_s, 0);
        client.set_write_timeout(endpoint.timeout_s, 0);

        auto res = client.Post(path, headers, payload, "application/json");
        if (res && res->status >= 200 && res->status < 300) {
            json parsed = json::parse(res->body, nullptr, false);
            if (parsed.is_discarded()) {
                throw ProtocolError("endpoint returned a non-JSON body");
            }
            if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
                parsed["choices"].empty()) {
                throw ProtocolError("endpoint response has no choices");
            }
            const json& message = parsed["choices"][0].value("message", json::object());
            if (!message.contains("content") || !message["content"].is_string()) {
                throw ProtocolError("endpoint response has no message content");
            }
            return message["content"].get<std::string>();
        }

        if (res) {
            last_status = res->status;
            last_detail = "HTTP " + std::to_string(res->status);
            if (!transient_status(res->status)) {
                throw TransportError("classifier request failed with " + last_detail, res->status);
            }
        } else {
            last_status = 0;
            last_detail = "no response: " + httplib::to_string(res.error());
        }
        if (attempt < endpoint.max_retries) {
            std::this_thread::sleep_for(std::chrono::milliseconds(
                backoff_ms(endpoint, attempt, res ? &*res : nullptr)));
        }
    }
    throw TransportError("classifier request failed after " +
                             std::to_string(endpoint.max_retries + 1) + " attempts (" +
                             last_detail + ")",
                         last_status);
}

MockClassifier::MockClassifier(std::map<std::string, std::string> script_by_digest,
                               std::string default_response, std::string name)
    : mode_(MockMode::scripted),
      name_(std::move(name)),
      script_(std::move(script_by_digest)),
      default_response_(std::move(default_response)) {}

MockClassifier MockClassifier::fixed(std::string response, std::string name) {
    MockClassifier mock(MockMode::fixed);
    mock.name_ = std::move(name);
    mock.default_response_ = std::move(response);
    return mock;
}

MockClassifier MockClassifier::hash_pick(std::vector<std::string> labels, std::string name) {
    if (labels.empty()) {
        throw InvalidInputError("hash-pick mock needs at least one label");
    }
    MockClassifier mock(MockMode::hash_pick);
    mock.name_ = std::move(name);
    mock.labels_ = std::move(labels);
    return mock;
}

std::string MockClassifier::classify(const std::string& prompt) {
    calls_.fetch_add(1);
    switch (mode_) {
        case MockMode::scripted:
            return mock_classify(script_, default_response_, prompt);
        case MockMode::fixed:
            return default_response_;
        case MockMode::hash_pick: {
            const std::string digest = sha256_hex(prompt);
            // First 8 hex digits as an integer index.
            const std::uint64_t bucket = std::stoull(digest.substr(0, 8), nullptr, 16);
            return labels_[bucket % labels_.size()];
        }
    }
    return default_response_;
}

CacheIdentity MockClassifier::cache_identity() const {
    std::string fingerprint = name_ + ":" + std::to_string(static_cast<int>(mode_));
    for (const auto& [digest, response] : script_) fingerprint += digest + "=" + response + ";";
    for (const auto& label : labels_) fingerprint += label + ",";
    fingerprint += default_response_;
    return CacheIdentity{"mock:" + name_ + ":" + sha256_hex(fingerprint).substr(0, 12), 0.0, 0};
}

void MockClassifier::script_prompt(const std::string& prompt, std::string response) {
    if (mode_ != MockMode::scripted) {
        throw InvalidInputError("only scripted mocks accept per-prompt responses");
    }
    script_[sha256_hex(prompt)] = std::move(response);
}

std::string mock_classify(const std::map<std::string, std::string>& script_by_digest,
                          const std::string& default_response, const std::string& prompt) {
    auto it = script_by_digest.find(sha256_hex(prompt));
    return it == script_by_digest.end() ? default_response : it->second;
}

}  // namespace promptgauge
