#pragma once

#include <stdexcept>
#include <string>

namespace anchorkit {

/// Malformed input file (config document or record stream). `where()`
/// carries file/line context when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string where, const std::string& message)
      : std::runtime_error(where.empty() ? message : where + ": " + message),
        where_(std::move(where)) {}

  explicit ParseError(const std::string& message) : ParseError("", message) {}

  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

}  // namespace anchorkit
