#pragma once

namespace fsk {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace fsk
