#pragma once

#include <cstddef>
#include <string>

namespace anchorkit {

/// Traffic-light signal class predicted by the state branch.
enum class State { off = 0, red = 1, yellow = 2, green = 3 };

inline constexpr std::size_t kStateCount = 4;

const char* to_string(State state);

/// Throws ParseError for anything but "off", "red", "yellow", "green".
State parse_state(const std::string& text);

}  // namespace anchorkit
