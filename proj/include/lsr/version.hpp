#pragma once

namespace lsr {
inline constexpr const char* kToolName = "lsred";
inline constexpr const char* kVersion = "0.1.0";
}  // namespace lsr
