#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "anchorkit/report.hpp"

namespace anchorkit::cli {

struct Size2d {
  std::int64_t h = 0;
  std::int64_t w = 0;
};

/// Parses "HxW" (e.g. "512x2048"); both extents must be positive.
Size2d parse_size(const std::string& text);

/// Log level from ANCHORKIT_LOG: "debug" enables log_debug, anything else
/// (or unset) keeps only log_info. Messages go to stderr.
bool debug_enabled();
void log_info(const std::string& message);
void log_debug(const std::string& message);

/// Milliseconds since construction.
class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Manifest skeleton for one subcommand run; inputs are digested on add.
RunManifest make_manifest(const std::string& subcommand);
void add_input(RunManifest& manifest, const std::string& path);

}  // namespace anchorkit::cli
