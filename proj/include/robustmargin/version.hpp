#pragma once

namespace robustmargin {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace robustmargin
