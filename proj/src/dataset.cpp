#include "promptgauge/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "promptgauge/digest.hpp"
#include "promptgauge/errors.hpp"

namespace promptgauge {

namespace {

using nlohmann::json;

bool blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::vector<DatasetSample> ingest_dataset(const std::filesystem::path& path,
                                          const std::vector<std::string>& labels) {
    std::ifstream in(path);
    if (!in) {
        throw StorageError("cannot open dataset file: " + path.string());
    }
    std::unordered_set<std::string> label_set(labels.begin(), labels.end());
    std::unordered_set<std::string> ids;
    std::vector<DatasetSample> samples;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;

        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw ParseError("line " + std::to_string(line_no) + ": not a JSON object", line_no);
        }
        if (!record.contains("id") || !record["id"].is_string()) {
            throw ParseError("line " + std::to_string(line_no) + ": missing string field 'id'",
                             line_no);
        }
        if (!record.contains("text") || !record["text"].is_string()) {
            throw ParseError("line " + std::to_string(line_no) + ": missing string field 'text'",
                             line_no);
        }

        DatasetSample sample;
        sample.id = record["id"].get<std::string>();
        sample.text = record["text"].get<std::string>();
        if (sample.text.empty()) {
            throw ParseError("line " + std::to_string(line_no) + ": 'text' is empty", line_no);
        }
        if (!ids.insert(sample.id).second) {
            throw ValidationError("duplicate sample id '" + sample.id + "' at line " +
                                  std::to_string(line_no));
        }
        if (record.contains("label") && !record["label"].is_null()) {
            if (!record["label"].is_string()) {
                throw ParseError("line " + std::to_string(line_no) + ": 'label' must be a string",
                                 line_no);
            }
            sample.gold = record["label"].get<std::string>();
            if (!label_set.count(*sample.gold)) {
                throw ValidationError("unknown gold label '" + *sample.gold + "' at line " +
                                      std::to_string(line_no));
            }
        }
        samples.push_back(std::move(sample));
    }
    return samples;
}

std::string dataset_digest(const std::vector<DatasetSample>& samples) {
    // Length-prefixed fields make the encoding unambiguous.
    std::string canonical;
    for (const auto& sample : samples) {
        canonical += std::to_string(sample.id.size()) + ":" + sample.id;
        canonical += std::to_string(sample.text.size()) + ":" + sample.text;
        if (sample.gold) {
            canonical += std::to_string(sample.gold->size()) + ":" + *sample.gold;
        } else {
            canonical += "-";
        }
        canonical += '\n';
    }
    return sha256_hex(canonical);
}

}  // namespace promptgauge
