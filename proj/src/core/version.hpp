#pragma once

namespace swnav {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace swnav
