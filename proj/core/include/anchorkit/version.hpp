#pragma once

namespace anchorkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace anchorkit
