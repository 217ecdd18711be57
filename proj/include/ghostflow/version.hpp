#pragma once

namespace ghostflow {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ghostflow
