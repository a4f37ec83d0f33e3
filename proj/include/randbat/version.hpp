#pragma once

namespace randbat {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace randbat
