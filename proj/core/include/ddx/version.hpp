#pragma once

namespace ddx {

inline constexpr const char* kToolVersion = "ddx 0.1.0";

} // namespace ddx
