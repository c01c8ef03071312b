#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptgauge/errors.hpp"

namespace promptgauge {

// One prediction outcome: a class index in [0, C) or the N/A fallback recorded
// when the classifier's response cannot be mapped onto any label.
class Outcome {
public:
    static Outcome na() { return Outcome(kNaValue); }

    static Outcome label(int index) {
        if (index < 0) throw InvalidInputError("label index must be non-negative");
        return Outcome(index);
    }

    bool is_na() const { return value_ == kNaValue; }

    int index() const {
        if (is_na()) throw InvalidInputError("N/A outcome has no label index");
        return value_;
    }

    friend bool operator==(Outcome a, Outcome b) { return a.value_ == b.value_; }
    friend bool operator!=(Outcome a, Outcome b) { return a.value_ != b.value_; }

private:
    static constexpr int kNaValue = -1;
    explicit Outcome(int v) : value_(v) {}
    int value_;
};

// The fixed label universe of a run. Index <-> label mapping never changes once
// constructed; when the N/A fallback is enabled it occupies one extra slot after
// the real labels in every distribution vector.
class ClassSpace {
public:
    ClassSpace(std::vector<std::string> labels, bool na_enabled);

    // C: the number of real labels (N/A excluded).
    std::size_t num_labels() const { return labels_.size(); }
    bool na_enabled() const { return na_enabled_; }
    // Distribution vector length: C, plus one when the N/A slot exists.
    std::size_t num_slots() const { return labels_.size() + (na_enabled_ ? 1 : 0); }

    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label_at(std::size_t c) const;
    std::optional<std::size_t> index_of(std::string_view label) const;

    bool valid_outcome(Outcome o) const {
        if (o.is_na()) return na_enabled_;
        return static_cast<std::size_t>(o.index()) < labels_.size();
    }

private:
    std::vector<std::string> labels_;
    bool na_enabled_;
};

}  // namespace promptgauge
