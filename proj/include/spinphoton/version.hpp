#pragma once

namespace spinphoton {

inline constexpr const char* kToolName = "cavity-herald";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace spinphoton
