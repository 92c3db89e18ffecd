#pragma once

namespace hmcf {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace hmcf
