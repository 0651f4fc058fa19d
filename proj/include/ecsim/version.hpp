#pragma once

namespace ecsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ecsim
