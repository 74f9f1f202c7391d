#pragma once

namespace oaipp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace oaipp
