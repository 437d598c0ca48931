#pragma once

namespace setassoc {

inline constexpr const char* kProgramName = "setassoc";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace setassoc
