#include "promptgauge/rephrasing.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

namespace promptgauge {

namespace {

using nlohmann::json;

// Collapse whitespace runs and trim, for duplicate detection only.
std::string normalize_ws(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(c);
    }
    return out;
}

std::string lowercase(const std::string& s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool contains_ci(const std::string& haystack_lower, const std::string& needle) {
    return haystack_lower.find(lowercase(needle)) != std::string::npos;
}

}  // namespace

std::string StubSampler::sample(const std::string& base, std::size_t variant,
                                std::size_t attempt) {
    std::string out = base + " (variant " + std::to_string(variant) + ")";
    if (attempt > 0) out += " [retry " + std::to_string(attempt) + "]";
    return out;
}

RephrasingProvenance StubSampler::provenance() const {
    return RephrasingProvenance{"stub", "", {}};
}

LlmSampler::LlmSampler(Classifier& llm, std::string meta_prompt)
    : llm_(llm), meta_prompt_(std::move(meta_prompt)) {}

std::string LlmSampler::sample(const std::string& base, std::size_t variant,
                               std::size_t attempt) {
    std::string prompt = meta_prompt_;
    prompt += "\n\nTask description: ";
    prompt += base;
    prompt += "\n\nRewrite #" + std::to_string(variant) + ":";
    if (attempt > 0) {
        prompt += " (use a different wording than any earlier rewrite)";
    }
    return llm_.classify(prompt);
}

RephrasingProvenance LlmSampler::provenance() const {
    const CacheIdentity id = llm_.cache_identity();
    RephrasingProvenance prov{"llm", id.model_name, {}};
    prov.params["temperature"] = std::to_string(id.temperature);
    if (id.seed) prov.params["seed"] = std::to_string(*id.seed);
    prov.params["meta_prompt"] = meta_prompt_;
    return prov;
}

RephrasingSet generate_rephrasings(const TaskSpec& spec, std::size_t q,
                                   RephrasingSampler& sampler, const GenerateOptions& options,
                                   std::vector<std::string>* warnings) {
    if (q < 1) throw InvalidInputError("rephrasing count must be at least 1");
    if (spec.base_description.empty()) {
        throw InvalidInputError("task spec has an empty base description");
    }

    RephrasingSet set;
    set.base = spec.base_description;
    set.rephrasings.push_back(spec.base_description);
    set.provenance = sampler.provenance();
    set.provenance.params["q"] = std::to_string(q);

    std::unordered_set<std::string> seen{normalize_ws(spec.base_description)};

    for (std::size_t variant = 1; variant < q; ++variant) {
        std::string accepted;
        bool have = false;
        std::size_t failures = 0;

        for (std::size_t attempt = 0; attempt <= options.duplicate_retries; ++attempt) {
            std::string candidate;
            try {
                candidate = sampler.sample(spec.base_description, variant, attempt);
            } catch (const Error& e) {
                if (++failures > options.failure_retries) {
                    throw SamplerExhaustedError(
                        "sampler failed " + std::to_string(failures) + " times on slot " +
                            std::to_string(variant) + ": " + e.what(),
                        set);
                }
                continue;
            }
            const std::string key = normalize_ws(candidate);
            if (key.empty()) {
                if (++failures > options.failure_retries) {
                    throw SamplerExhaustedError(
                        "sampler kept returning empty text on slot " + std::to_string(variant),
                        set);
                }
                continue;
            }
            accepted = candidate;
            have = true;
            if (seen.insert(key).second) break;
            // Duplicate: keep the latest candidate but try again unless the
            // retry budget is spent.
            if (attempt == options.duplicate_retries && warnings) {
                warnings->push_back("slot " + std::to_string(variant) +
                                    " kept a duplicate rephrasing after " +
                                    std::to_string(options.duplicate_retries) + " retries");
            }
        }
        if (!have) {
            throw SamplerExhaustedError(
                "sampler produced nothing usable for slot " + std::to_string(variant), set);
        }
        set.rephrasings.push_back(std::move(accepted));
    }
    return set;
}

std::vector<std::string> validate_rephrasing_set(const RephrasingSet& set, const TaskSpec& spec,
                                                 double max_length_ratio) {
    std::vector<std::string> warnings;
    if (set.rephrasings.empty()) {
        warnings.push_back("rephrasing set is empty");
        return warnings;
    }
    if (set.rephrasings.front() != set.base) {
        warnings.push_back("entry 0 differs from the base description");
    }

    // Labels the base description actually mentions; entries dropping all of
    // them likely paraphrased the label names away.
    const std::string base_lower = lowercase(set.base);
    std::vector<std::string> labels_in_base;
    for (const auto& label : spec.labels) {
        if (contains_ci(base_lower, label)) labels_in_base.push_back(label);
    }

    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < set.rephrasings.size(); ++i) {
        const std::string& entry = set.rephrasings[i];
        const std::string key = normalize_ws(entry);
        if (key.empty()) {
            warnings.push_back("entry " + std::to_string(i) + " is empty");
            continue;
        }
        if (!seen.insert(key).second) {
            warnings.push_back("entry " + std::to_string(i) +
                               " duplicates an earlier entry (after whitespace normalization)");
        }
        if (!labels_in_base.empty()) {
            const std::string entry_lower = lowercase(entry);
            const bool any = std::any_of(labels_in_base.begin(), labels_in_base.end(),
                                         [&](const std::string& label) {
                                             return contains_ci(entry_lower, label);
                                         });
            if (!any) {
                warnings.push_back("entry " + std::to_string(i) +
                                   " mentions none of the label names present in the base");
            }
        }
        if (!set.base.empty() &&
            static_cast<double>(entry.size()) >
                max_length_ratio * static_cast<double>(set.base.size())) {
            warnings.push_back("entry " + std::to_string(i) + " is more than " +
                               std::to_string(max_length_ratio) + "x longer than the base");
        }
    }
    return warnings;
}

json rephrasing_set_to_json(const RephrasingSet& set) {
    json params = json::object();
    for (const auto& [key, value] : set.provenance.params) params[key] = value;
    return json{
        {"base", set.base},
        {"rephrasings", set.rephrasings},
        {"provenance",
         {{"sampler", set.provenance.sampler},
          {"model", set.provenance.model},
          {"params", params}}},
    };
}

RephrasingSet rephrasing_set_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("base") || !doc.contains("rephrasings")) {
        throw ParseError("rephrasing set document needs 'base' and 'rephrasings'");
    }
    RephrasingSet set;
    set.base = doc["base"].get<std::string>();
    set.rephrasings = doc["rephrasings"].get<std::vector<std::string>>();
    if (doc.contains("provenance")) {
        const json& prov = doc["provenance"];
        set.provenance.sampler = prov.value("sampler", "");
        set.provenance.model = prov.value("model", "");
        if (prov.contains("params")) {
            for (const auto& [key, value] : prov["params"].items()) {
                set.provenance.params[key] = value.get<std::string>();
            }
        }
    }
    return set;
}

void save_rephrasing_set(const RephrasingSet& set, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw StorageError("cannot write rephrasing set to " + path.string());
    out << rephrasing_set_to_json(set).dump(2) << '\n';
}

RephrasingSet load_rephrasing_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot read rephrasing set from " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ParseError("rephrasing set file is not valid JSON");
    return rephrasing_set_from_json(doc);
}

}  // namespace promptgauge
