#pragma once

#include <string>

#include "promptgauge/task_spec.hpp"

namespace promptgauge {

// Deterministic prompt assembly, byte-identical for identical inputs:
//
//   <rephrased task description>
//   - <label>                      (": <description>" appended under detail)
//   Example (<label>): <exemplar>  (one line per label, one_shot only)
//   <answer instruction>
//   Text: <sample text>
//
std::string build_prompt(const TaskSpec& spec, PromptStrategy strategy,
                         const std::string& rephrasing, const std::string& sample_text);

}  // namespace promptgauge
