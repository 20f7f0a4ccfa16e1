#pragma once

namespace evdeg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace evdeg
