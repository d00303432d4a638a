#pragma once

namespace gpsm {

inline constexpr const char* kVersion = "v0.1.0";

}  // namespace gpsm
