#include "util.hpp"

#include <cstdlib>
#include <iostream>

#include "anchorkit/error.hpp"
#include "anchorkit/version.hpp"

namespace anchorkit::cli {

Size2d parse_size(const std::string& text) {
  const auto sep = text.find_first_of("xX");
  if (sep == std::string::npos || sep == 0 || sep + 1 >= text.size()) {
    throw std::invalid_argument("expected HxW (e.g. 512x2048), got '" + text + "'");
  }
  Size2d size;
  try {
    std::size_t used = 0;
    size.h = std::stoll(text.substr(0, sep), &used);
    if (used != sep) throw std::invalid_argument("");
    const std::string rest = text.substr(sep + 1);
    size.w = std::stoll(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw std::invalid_argument("expected HxW (e.g. 512x2048), got '" + text + "'");
  }
  if (size.h < 1 || size.w < 1) {
    throw std::invalid_argument("input size must be positive, got '" + text + "'");
  }
  return size;
}

bool debug_enabled() {
  static const bool enabled = [] {
    const char* env = std::getenv("ANCHORKIT_LOG");
    return env != nullptr && std::string(env) == "debug";
  }();
  return enabled;
}

void log_info(const std::string& message) { std::cerr << "[anchorkit] " << message << "\n"; }

void log_debug(const std::string& message) {
  if (debug_enabled()) std::cerr << "[anchorkit:debug] " << message << "\n";
}

RunManifest make_manifest(const std::string& subcommand) {
  RunManifest manifest;
  manifest.subcommand = subcommand;
  manifest.tool_version = kVersion;
  manifest.created_utc = utc_timestamp();
  return manifest;
}

void add_input(RunManifest& manifest, const std::string& path) {
  manifest.inputs.push_back({path, fnv1a64_file(path)});
}

}  // namespace anchorkit::cli
