#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "promptgauge/class_space.hpp"
#include "promptgauge/gateway.hpp"

namespace promptgauge {

struct CacheKeyFields {
    std::string model_name;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    std::string prompt;
};

// SHA-256 over an unambiguous (length-prefixed) encoding of the fields; any
// byte change to any field changes the key.
std::string cache_key(const CacheKeyFields& fields);

// Directory of digest-named JSON entries, each storing the request fields, the
// raw response, and a timestamp. Raw responses are cached (not parsed
// outcomes) so parse-cascade changes never force re-querying. Reads are safe
// from any thread; writes are serialized internally.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<std::string> lookup(const std::string& key);
    bool contains(const std::string& key);
    void store(const std::string& key, const CacheKeyFields& fields,
               const std::string& raw_response);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path entry_path(const std::string& key) const;

    std::filesystem::path dir_;
    std::mutex mutex_;
    std::unordered_map<std::string, std::string> memo_;  // in-process write-through mirror
};

// Cache-through classification: hits re-parse the stored raw response with
// the current space; misses call the classifier and persist the raw response.
ParsedLabel cached_classify(Classifier& classifier, const std::string& prompt,
                            ResponseCache& cache, const ClassSpace& space);

}  // namespace promptgauge
