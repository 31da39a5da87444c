#pragma once

namespace netfactor {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace netfactor
