#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <anchorkit/geometry.hpp>
#include <anchorkit/state.hpp>

namespace anchorkit {

/// One annotated object. `tags` carries free-form strings; evaluation
/// reads the orientation (front/left/right/back) and audience
/// (vehicle/pedestrian/cyclist/tram/bus) tags from it.
struct GroundTruthRecord {
  std::string image_id;
  BoundingBox box;
  State state = State::off;
  std::string track_id;  // empty when unknown
  std::vector<std::string> tags;
  std::string sequence_id;
  std::string city;

  bool has_tag(const std::string& tag) const;
};

/// One final (post-suppression) detection.
struct PredictionRecord {
  std::string image_id;
  BoundingBox box;
  double confidence = 0.0;
  State state = State::off;
};

/// Label line: {image_id, x, y, w, h, state, track_id?, tags?[],
/// sequence_id?, city?}. Unknown fields are ignored so foreign exports
/// stay readable. Throws ParseError naming `where` on malformed input.
GroundTruthRecord parse_label_line(const std::string& line, const std::string& where = "label");

/// Detection line: {image_id, x, y, w, h, confidence, state}.
PredictionRecord parse_detection_line(const std::string& line,
                                      const std::string& where = "detection");

std::string write_label_line(const GroundTruthRecord& record);
std::string write_detection_line(const PredictionRecord& record);

struct StreamOptions {
  bool fail_fast = true;  // otherwise skip malformed lines and count them
};

struct StreamStats {
  std::int64_t records = 0;
  std::int64_t skipped = 0;
  std::vector<std::string> errors;  // capped at kMaxErrors

  static constexpr std::size_t kMaxErrors = 50;
};

/// Single-pass line-by-line streaming: one record in memory at a time.
/// Blank lines are ignored. Diagnostics carry "<source>:<line>".
StreamStats stream_labels(std::istream& in, const std::string& source_name,
                          const std::function<void(GroundTruthRecord&&)>& sink,
                          const StreamOptions& options = {});
StreamStats stream_detections(std::istream& in, const std::string& source_name,
                              const std::function<void(PredictionRecord&&)>& sink,
                              const StreamOptions& options = {});

StreamStats stream_labels_file(const std::string& path,
                               const std::function<void(GroundTruthRecord&&)>& sink,
                               const StreamOptions& options = {});
StreamStats stream_detections_file(const std::string& path,
                                   const std::function<void(PredictionRecord&&)>& sink,
                                   const StreamOptions& options = {});

}  // namespace anchorkit
