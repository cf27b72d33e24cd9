#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchorkit/error.hpp"
#include "anchorkit/records.hpp"
#include "commands.hpp"
#include "util.hpp"

namespace anchorkit::cli {

namespace {

struct Options {
  std::string input;
  std::string emit;
  bool experimental = false;
};

/// Best-effort attribute mapping. The source schema is a moving target,
/// so anything unrecognized degrades to a counted approximation instead
/// of an error.
struct ImportStats {
  std::int64_t images = 0;
  std::int64_t labels = 0;
  std::int64_t skipped = 0;
  std::int64_t approximated_states = 0;
};

State map_state(const std::string& text, ImportStats& stats) {
  if (text == "off") return State::off;
  if (text == "red") return State::red;
  if (text == "yellow") return State::yellow;
  if (text == "green") return State::green;
  // red_yellow and anything newer degrade to the nearest of the four.
  ++stats.approximated_states;
  if (text.rfind("red", 0) == 0) return State::red;
  return State::off;
}

std::string map_audience(const std::string& pictogram) {
  if (pictogram.find("pedestrian") != std::string::npos) return "pedestrian";
  if (pictogram.find("bicycle") != std::string::npos ||
      pictogram.find("cyclist") != std::string::npos) {
    return "cyclist";
  }
  if (pictogram.find("tram") != std::string::npos) return "tram";
  if (pictogram.find("bus") != std::string::npos) return "bus";
  return "vehicle";
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(path);
  while (std::getline(in, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

void run(const Options& opt) {
  if (!opt.experimental) {
    throw std::invalid_argument(
        "import-dtld is a best-effort converter for an evolving external schema; "
        "pass --experimental to run it anyway");
  }

  WallTimer timer;
  RunManifest manifest = make_manifest("import-dtld");
  add_input(manifest, opt.input);

  std::ifstream in(opt.input);
  if (!in) throw ParseError(opt.input, "cannot open file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(opt.input, e.what());
  }
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array()) {
    throw ParseError(opt.input, "expected an object with an 'images' array");
  }

  ImportStats stats;
  std::string out;
  for (const nlohmann::json& image : doc["images"]) {
    if (!image.is_object() || !image.contains("image_path")) {
      ++stats.skipped;
      continue;
    }
    ++stats.images;
    const std::string image_path = image["image_path"].get<std::string>();
    const std::vector<std::string> parts = split_path(image_path);

    GroundTruthRecord base;
    base.image_id = image_path;
    if (!parts.empty()) base.city = parts.front();
    if (parts.size() >= 2) base.sequence_id = parts[parts.size() - 2];

    if (!image.contains("labels") || !image["labels"].is_array()) continue;
    for (const nlohmann::json& label : image["labels"]) {
      try {
        GroundTruthRecord record = base;
        record.box = BoundingBox::from_xywh(
            label.at("x").get<double>(), label.at("y").get<double>(),
            label.at("w").get<double>(), label.at("h").get<double>());
        if (label.contains("track_id") && label["track_id"].is_string()) {
          record.track_id = label["track_id"].get<std::string>();
        }
        const nlohmann::json attributes =
            label.contains("attributes") ? label["attributes"] : nlohmann::json::object();
        record.state = map_state(attributes.value("state", "off"), stats);
        record.tags.push_back(attributes.value("direction", "front"));
        record.tags.push_back(map_audience(attributes.value("pictogram", "circle")));
        if (attributes.value("relevance", "") == "not_relevant") {
          record.tags.push_back("not_relevant");
        }
        out += write_label_line(record) + "\n";
        ++stats.labels;
      } catch (const std::exception&) {
        ++stats.skipped;
      }
    }
  }

  nlohmann::ordered_json config;
  config["experimental"] = true;
  manifest.config_json = config.dump();
  manifest.wall_ms = timer.ms();
  emit_report(opt.emit, out, manifest);

  std::cout << "images               " << stats.images << "\n"
            << "labels               " << stats.labels << "\n"
            << "skipped              " << stats.skipped << "\n"
            << "approximated states  " << stats.approximated_states << "\n";
}

}  // namespace

void register_import_dtld(CLI::App& app) {
  auto opt = std::make_shared<Options>();
  CLI::App* cmd = app.add_subcommand(
      "import-dtld", "best-effort conversion of a public driving-dataset label file to JSONL");
  cmd->add_option("input", opt->input, "source label file (JSON)")->required();
  cmd->add_option("--emit", opt->emit, "labels output path (.jsonl)")->required();
  cmd->add_flag("--experimental", opt->experimental,
                "acknowledge that the source schema is unversioned and may drift");
  cmd->callback([opt] { run(*opt); });
}

}  // namespace anchorkit::cli
