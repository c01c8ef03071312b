#include "promptgauge/class_space.hpp"

#include <unordered_set>

namespace promptgauge {

ClassSpace::ClassSpace(std::vector<std::string> labels, bool na_enabled)
    : labels_(std::move(labels)), na_enabled_(na_enabled) {
    if (labels_.size() < 2) {
        throw InvalidInputError("a class space needs at least two labels");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& label : labels_) {
        if (label.empty()) {
            throw InvalidInputError("class labels must be non-empty");
        }
        if (!seen.insert(label).second) {
            throw InvalidInputError("duplicate class label: " + label);
        }
    }
}

const std::string& ClassSpace::label_at(std::size_t c) const {
    if (c >= labels_.size()) {
        throw InvalidInputError("label index out of range");
    }
    return labels_[c];
}

std::optional<std::size_t> ClassSpace::index_of(std::string_view label) const {
    for (std::size_t c = 0; c < labels_.size(); ++c) {
        if (labels_[c] == label) return c;
    }
    return std::nullopt;
}

}  // namespace promptgauge
