#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace promptgauge {

struct DatasetSample {
    std::string id;
    std::string text;
    std::optional<std::string> gold;  // label name; validated against the run labels
};

// JSON-Lines ingestion: one {"id","text","label"?} object per line, file order
// preserved. Throws ParseError (with line number) on malformed lines and
// ValidationError on duplicate ids or unknown gold labels.
std::vector<DatasetSample> ingest_dataset(const std::filesystem::path& path,
                                          const std::vector<std::string>& labels);

// Content digest of the canonical sample encoding, independent of file
// formatting; identifies the dataset inside run manifests.
std::string dataset_digest(const std::vector<DatasetSample>& samples);

}  // namespace promptgauge
