#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace anchorkit {

/// RFC 4180 quoting: fields containing a comma, quote, or line break come
/// back quoted with inner quotes doubled.
std::string csv_field(const std::string& value);

/// Quoted fields joined by commas, newline-terminated.
std::string csv_row(const std::vector<std::string>& fields);

/// Up to 10 significant digits, trailing zeros trimmed; identical values
/// always print identically, keeping emitted reports byte-stable.
std::string format_number(double value);

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& text);

/// Digest of a file's bytes. Throws ParseError when the file cannot be
/// read.
std::uint64_t fnv1a64_file(const std::string& path);

struct ManifestInput {
  std::string path;
  std::uint64_t digest = 0;
};

/// Provenance sidecar written as `<report>.manifest.json` beside every
/// emitted report. Reports themselves carry no timestamps, so equal runs
/// emit equal report bytes; the clock lives here.
struct RunManifest {
  std::string subcommand;
  std::string tool_version;
  std::vector<ManifestInput> inputs;
  std::string config_json;  // resolved options snapshot, JSON text
  double wall_ms = 0.0;
  std::string created_utc;

  std::string to_json() const;
};

std::string utc_timestamp();

void write_text_file(const std::string& path, const std::string& content);

/// Writes the report and its manifest sidecar.
void emit_report(const std::string& path, const std::string& content,
                 const RunManifest& manifest);

}  // namespace anchorkit
