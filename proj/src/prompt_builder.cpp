#include "promptgauge/prompt_builder.hpp"

#include "promptgauge/errors.hpp"

namespace promptgauge {

std::string to_string(PromptStrategy strategy) {
    switch (strategy) {
        case PromptStrategy::simple: return "simple";
        case PromptStrategy::detail: return "detail";
        case PromptStrategy::one_shot: return "one_shot";
    }
    throw InvalidInputError("unknown prompting strategy");
}

PromptStrategy strategy_from_string(std::string_view name) {
    if (name == "simple") return PromptStrategy::simple;
    if (name == "detail") return PromptStrategy::detail;
    if (name == "one_shot" || name == "1-shot" || name == "one-shot") {
        return PromptStrategy::one_shot;
    }
    throw InvalidInputError("unknown prompting strategy: " + std::string(name));
}

void validate_for_strategy(const TaskSpec& spec, PromptStrategy strategy) {
    if (spec.base_description.empty()) {
        throw InvalidInputError("task spec has an empty base description");
    }
    if (spec.answer_instruction.empty()) {
        throw InvalidInputError("task spec has an empty answer instruction");
    }
    ClassSpace(spec.labels, false);  // label invariants

    if (strategy == PromptStrategy::detail) {
        for (const auto& label : spec.labels) {
            auto it = spec.label_descriptions.find(label);
            if (it == spec.label_descriptions.end() || it->second.empty()) {
                throw SpecIncompleteError("detail strategy needs a description for label: " + label);
            }
        }
    }
    if (strategy == PromptStrategy::one_shot) {
        for (const auto& label : spec.labels) {
            auto it = spec.exemplars.find(label);
            if (it == spec.exemplars.end() || it->second.empty()) {
                throw SpecIncompleteError("one-shot strategy needs an exemplar for label: " + label);
            }
        }
    }
}

ClassSpace class_space_of(const TaskSpec& spec, bool na_enabled) {
    return ClassSpace(spec.labels, na_enabled);
}

std::string build_prompt(const TaskSpec& spec, PromptStrategy strategy,
                         const std::string& rephrasing, const std::string& sample_text) {
    validate_for_strategy(spec, strategy);

    std::string prompt;
    prompt.reserve(rephrasing.size() + sample_text.size() + 64 * spec.labels.size());
    prompt += rephrasing;
    prompt += '\n';
    for (const auto& label : spec.labels) {
        prompt += "- ";
        prompt += label;
        if (strategy == PromptStrategy::detail) {
            prompt += ": ";
            prompt += spec.label_descriptions.at(label);
        }
        prompt += '\n';
    }
    if (strategy == PromptStrategy::one_shot) {
        for (const auto& label : spec.labels) {
            prompt += "Example (";
            prompt += label;
            prompt += "): ";
            prompt += spec.exemplars.at(label);
            prompt += '\n';
        }
    }
    prompt += spec.answer_instruction;
    prompt += "\nText: ";
    prompt += sample_text;
    return prompt;
}

}  // namespace promptgauge
