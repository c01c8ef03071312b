#pragma once

namespace promptgauge {

inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace promptgauge
