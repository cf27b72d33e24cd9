#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchorkit/error.hpp"
#include "anchorkit/nms.hpp"
#include "anchorkit/records.hpp"
#include "commands.hpp"
#include "util.hpp"

namespace anchorkit::cli {

namespace {

struct Options {
  std::string raw;
  double iou = 0.35;
  std::string emit;
};

/// Raw row: {image_id, x, y, w, h, confidence, state_scores[4]}. State is
/// still a score vector here; suppression picks the final state.
Detection parse_raw_line(const std::string& line, const std::string& where) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(where, e.what());
  }
  try {
    Detection det;
    det.image_id = doc.at("image_id").get<std::string>();
    const double x = doc.at("x").get<double>();
    const double y = doc.at("y").get<double>();
    const double w = doc.at("w").get<double>();
    const double h = doc.at("h").get<double>();
    det.box = BoundingBox::from_xywh(x, y, w, h);
    det.confidence = doc.at("confidence").get<double>();
    const auto& scores = doc.at("state_scores");
    if (!scores.is_array() || scores.size() != det.state.size()) {
      throw ParseError(where, "'state_scores' must be an array of 4 numbers");
    }
    for (std::size_t i = 0; i < det.state.size(); ++i) {
      det.state[i] = scores.at(i).get<double>();
    }
    return det;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where, e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(where, e.what());
  }
}

void run(const Options& opt) {
  WallTimer timer;
  RunManifest manifest = make_manifest("nms");
  add_input(manifest, opt.raw);

  std::ifstream in(opt.raw);
  if (!in) throw ParseError(opt.raw, "cannot open file");

  std::map<std::string, std::vector<Detection>> images;
  std::string line;
  std::int64_t line_no = 0;
  std::int64_t raw_count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Detection det = parse_raw_line(line, opt.raw + ":" + std::to_string(line_no));
    images[det.image_id].push_back(std::move(det));
    ++raw_count;
  }

  std::string report;
  std::int64_t kept = 0;
  for (const auto& [image_id, dets] : images) {
    for (const FinalDetection& survivor : suppress(dets, opt.iou)) {
      PredictionRecord record;
      record.image_id = survivor.image_id;
      record.box = survivor.box;
      record.confidence = survivor.confidence;
      record.state = survivor.state;
      report += write_detection_line(record) + "\n";
      ++kept;
    }
  }

  std::cout << "raw detections   " << raw_count << "\n"
            << "images           " << images.size() << "\n"
            << "survivors        " << kept << "\n";

  if (opt.emit.empty()) return;
  nlohmann::ordered_json config;
  config["iou"] = opt.iou;
  manifest.config_json = config.dump();
  manifest.wall_ms = timer.ms();
  emit_report(opt.emit, report, manifest);
  log_debug("nms: wrote " + opt.emit);
}

}  // namespace

void register_nms(CLI::App& app) {
  auto opt = std::make_shared<Options>();
  CLI::App* cmd = app.add_subcommand("nms", "greedy class-independent non-maximum suppression");
  cmd->add_option("raw", opt->raw,
                  "raw detections (.jsonl): {image_id, x, y, w, h, confidence, state_scores[4]}")
      ->required();
  cmd->add_option("--iou", opt->iou, "suppression IoU threshold (default 0.35)");
  cmd->add_option("--emit", opt->emit, "write surviving detections as JSONL to this file");
  cmd->callback([opt] { run(*opt); });
}

}  // namespace anchorkit::cli
