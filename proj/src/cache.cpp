#include "promptgauge/cache.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "promptgauge/digest.hpp"
#include "promptgauge/errors.hpp"

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

std::string length_prefixed(const std::string& field) {
    return std::to_string(field.size()) + ":" + field;
}

}  // namespace

std::string cache_key(const CacheKeyFields& fields) {
    char temperature[64];
    std::snprintf(temperature, sizeof(temperature), "%.17g", fields.temperature);
    std::string canonical = "model=" + length_prefixed(fields.model_name);
    canonical += "|temperature=" + std::string(temperature);
    canonical += "|seed=" + (fields.seed ? std::to_string(*fields.seed) : std::string("none"));
    canonical += "|prompt=" + length_prefixed(fields.prompt);
    return sha256_hex(canonical);
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
        throw StorageError("cannot create cache directory " + dir_.string() + ": " + ec.message());
    }
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
    return dir_ / (key + ".json");
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) {
    {
        std::lock_guard lock(mutex_);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
    }
    std::ifstream in(entry_path(key));
    if (!in) return std::nullopt;
    json entry = json::parse(in, nullptr, false);
    if (entry.is_discarded() || !entry.contains("raw_response") ||
        !entry["raw_response"].is_string()) {
        throw StorageError("corrupt cache entry: " + entry_path(key).string());
    }
    std::string raw = entry["raw_response"].get<std::string>();
    {
        std::lock_guard lock(mutex_);
        memo_[key] = raw;
    }
    return raw;
}

bool ResponseCache::contains(const std::string& key) {
    {
        std::lock_guard lock(mutex_);
        if (memo_.count(key)) return true;
    }
    return std::filesystem::exists(entry_path(key));
}

void ResponseCache::store(const std::string& key, const CacheKeyFields& fields,
                          const std::string& raw_response) {
    json entry{
        {"request",
         {{"model", fields.model_name},
          {"temperature", fields.temperature},
          {"seed", fields.seed ? json(*fields.seed) : json(nullptr)},
          {"prompt", fields.prompt}}},
        {"raw_response", raw_response},
        {"timestamp", utc_timestamp()},
    };

    std::lock_guard lock(mutex_);
    const auto final_path = entry_path(key);
    const auto tmp_path = final_path.string() + ".tmp";
    {
        std::ofstream out(tmp_path);
        if (!out) throw StorageError("cannot write cache entry: " + tmp_path);
        out << entry.dump(2) << '\n';
        if (!out) throw StorageError("short write on cache entry: " + tmp_path);
    }
    std::error_code ec;
    std::filesystem::rename(tmp_path, final_path, ec);
    if (ec) throw StorageError("cannot finalize cache entry " + final_path.string());
    memo_[key] = raw_response;
}

ParsedLabel cached_classify(Classifier& classifier, const std::string& prompt,
                            ResponseCache& cache, const ClassSpace& space) {
    const CacheIdentity id = classifier.cache_identity();
    const CacheKeyFields fields{id.model_name, id.temperature, id.seed, prompt};
    const std::string key = cache_key(fields);

    if (auto raw = cache.lookup(key)) {
        return parse_label(*raw, space);
    }
    const std::string raw = classifier.classify(prompt);
    cache.store(key, fields, raw);
    return parse_label(raw, space);
}

}  // namespace promptgauge
