#pragma once

namespace gls {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gls
