#include <anchorkit/records.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>

#include <json.hpp>

#include <anchorkit/error.hpp>

namespace anchorkit {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

json parse_object(const std::string& line, const std::string& where) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(where, e.what());
  }
  if (!doc.is_object()) throw ParseError(where, "record must be a JSON object");
  return doc;
}

std::string required_string(const json& doc, const char* field, const std::string& where) {
  if (!doc.contains(field) || !doc[field].is_string()) {
    throw ParseError(where, std::string("missing string field '") + field + "'");
  }
  return doc[field].get<std::string>();
}

double required_number(const json& doc, const char* field, const std::string& where) {
  if (!doc.contains(field) || !doc[field].is_number()) {
    throw ParseError(where, std::string("missing numeric field '") + field + "'");
  }
  return doc[field].get<double>();
}

BoundingBox parse_box(const json& doc, const std::string& where) {
  const double x = required_number(doc, "x", where);
  const double y = required_number(doc, "y", where);
  const double w = required_number(doc, "w", where);
  const double h = required_number(doc, "h", where);
  if (w < 0.0 || h < 0.0) throw ParseError(where, "box width/height must be nonnegative");
  return BoundingBox::from_xywh(x, y, w, h);
}

State parse_state_field(const json& doc, const std::string& where) {
  const std::string text = required_string(doc, "state", where);
  try {
    return parse_state(text);
  } catch (const ParseError& e) {
    throw ParseError(where, e.what());
  }
}

template <typename Record>
StreamStats stream_lines(std::istream& in, const std::string& source_name,
                         Record (*parse)(const std::string&, const std::string&),
                         const std::function<void(Record&&)>& sink,
                         const StreamOptions& options) {
  StreamStats stats;
  std::string line;
  for (std::int64_t number = 1; std::getline(in, line); ++number) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source_name + ":" + std::to_string(number);
    try {
      Record record = parse(line, where);
      ++stats.records;
      sink(std::move(record));
    } catch (const ParseError& e) {
      if (options.fail_fast) throw;
      ++stats.skipped;
      if (stats.errors.size() < StreamStats::kMaxErrors) stats.errors.push_back(e.what());
    }
  }
  return stats;
}

template <typename Record>
StreamStats stream_file(const std::string& path,
                        StreamStats (*stream)(std::istream&, const std::string&,
                                              const std::function<void(Record&&)>&,
                                              const StreamOptions&),
                        const std::function<void(Record&&)>& sink,
                        const StreamOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  return stream(in, path, sink, options);
}

}  // namespace

const char* to_string(State state) {
  switch (state) {
    case State::off: return "off";
    case State::red: return "red";
    case State::yellow: return "yellow";
    case State::green: return "green";
  }
  return "off";
}

State parse_state(const std::string& text) {
  if (text == "off") return State::off;
  if (text == "red") return State::red;
  if (text == "yellow") return State::yellow;
  if (text == "green") return State::green;
  throw ParseError("unknown state '" + text + "'");
}

bool GroundTruthRecord::has_tag(const std::string& tag) const {
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

GroundTruthRecord parse_label_line(const std::string& line, const std::string& where) {
  const json doc = parse_object(line, where);
  GroundTruthRecord record;
  record.image_id = required_string(doc, "image_id", where);
  record.box = parse_box(doc, where);
  record.state = parse_state_field(doc, where);
  if (doc.contains("track_id")) {
    if (!doc["track_id"].is_string()) throw ParseError(where, "'track_id' must be a string");
    record.track_id = doc["track_id"].get<std::string>();
  }
  if (doc.contains("tags")) {
    if (!doc["tags"].is_array()) throw ParseError(where, "'tags' must be an array of strings");
    for (const auto& tag : doc["tags"]) {
      if (!tag.is_string()) throw ParseError(where, "'tags' must be an array of strings");
      record.tags.push_back(tag.get<std::string>());
    }
  }
  if (doc.contains("sequence_id")) {
    if (!doc["sequence_id"].is_string()) {
      throw ParseError(where, "'sequence_id' must be a string");
    }
    record.sequence_id = doc["sequence_id"].get<std::string>();
  }
  if (doc.contains("city")) {
    if (!doc["city"].is_string()) throw ParseError(where, "'city' must be a string");
    record.city = doc["city"].get<std::string>();
  }
  return record;
}

PredictionRecord parse_detection_line(const std::string& line, const std::string& where) {
  const json doc = parse_object(line, where);
  PredictionRecord record;
  record.image_id = required_string(doc, "image_id", where);
  record.box = parse_box(doc, where);
  record.confidence = required_number(doc, "confidence", where);
  if (!std::isfinite(record.confidence) || record.confidence < 0.0 ||
      record.confidence > 1.0) {
    throw ParseError(where, "'confidence' must lie in [0, 1]");
  }
  record.state = parse_state_field(doc, where);
  return record;
}

std::string write_label_line(const GroundTruthRecord& record) {
  ordered_json doc;
  doc["image_id"] = record.image_id;
  doc["x"] = record.box.x_min;
  doc["y"] = record.box.y_min;
  doc["w"] = record.box.width();
  doc["h"] = record.box.height();
  doc["state"] = to_string(record.state);
  if (!record.track_id.empty()) doc["track_id"] = record.track_id;
  if (!record.tags.empty()) doc["tags"] = record.tags;
  if (!record.sequence_id.empty()) doc["sequence_id"] = record.sequence_id;
  if (!record.city.empty()) doc["city"] = record.city;
  return doc.dump();
}

std::string write_detection_line(const PredictionRecord& record) {
  ordered_json doc;
  doc["image_id"] = record.image_id;
  doc["x"] = record.box.x_min;
  doc["y"] = record.box.y_min;
  doc["w"] = record.box.width();
  doc["h"] = record.box.height();
  doc["confidence"] = record.confidence;
  doc["state"] = to_string(record.state);
  return doc.dump();
}

StreamStats stream_labels(std::istream& in, const std::string& source_name,
                          const std::function<void(GroundTruthRecord&&)>& sink,
                          const StreamOptions& options) {
  return stream_lines<GroundTruthRecord>(in, source_name, parse_label_line, sink, options);
}

StreamStats stream_detections(std::istream& in, const std::string& source_name,
                              const std::function<void(PredictionRecord&&)>& sink,
                              const StreamOptions& options) {
  return stream_lines<PredictionRecord>(in, source_name, parse_detection_line, sink, options);
}

StreamStats stream_labels_file(const std::string& path,
                               const std::function<void(GroundTruthRecord&&)>& sink,
                               const StreamOptions& options) {
  return stream_file<GroundTruthRecord>(path, stream_labels, sink, options);
}

StreamStats stream_detections_file(const std::string& path,
                                   const std::function<void(PredictionRecord&&)>& sink,
                                   const StreamOptions& options) {
  return stream_file<PredictionRecord>(path, stream_detections, sink, options);
}

}  // namespace anchorkit
