#pragma once

namespace orthoinfer {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace orthoinfer
