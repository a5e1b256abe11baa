#pragma once

namespace oplab {

inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace oplab
