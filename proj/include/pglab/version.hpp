#pragma once

namespace pglab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pglab
