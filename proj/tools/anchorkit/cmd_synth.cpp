#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchorkit/records.hpp"
#include "anchorkit/synth.hpp"
#include "commands.hpp"
#include "util.hpp"

namespace anchorkit::cli {

namespace {

struct Options {
  std::string out_labels;
  std::string out_dets;
  SynthConfig config;
  std::string image_size = "512x2048";
};

void run(const Options& opt) {
  WallTimer timer;
  SynthConfig config = opt.config;
  const Size2d size = parse_size(opt.image_size);
  config.image_h = static_cast<double>(size.h);
  config.image_w = static_cast<double>(size.w);

  const SynthDataset dataset = synth_dataset(config);

  std::string labels;
  for (const GroundTruthRecord& record : dataset.labels) {
    labels += write_label_line(record) + "\n";
  }
  std::string dets;
  for (const PredictionRecord& record : dataset.detections) {
    dets += write_detection_line(record) + "\n";
  }

  nlohmann::ordered_json snapshot;
  snapshot["seed"] = config.seed;
  snapshot["images"] = config.n_images;
  snapshot["width_min"] = config.width_min;
  snapshot["width_max"] = config.width_max;
  snapshot["aspect_ratio"] = config.aspect_ratio;
  snapshot["fp_rate"] = config.fp_rate;
  snapshot["miss_rate"] = config.miss_rate;
  snapshot["dc_rate"] = config.dc_rate;
  snapshot["double_det_rate"] = config.double_det_rate;
  snapshot["jitter"] = config.jitter;
  snapshot["image_size"] = opt.image_size;
  snapshot["mean_objects"] = config.mean_objects;
  snapshot["sequence_length"] = config.sequence_length;

  RunManifest manifest = make_manifest("synth");
  manifest.config_json = snapshot.dump();
  manifest.wall_ms = timer.ms();
  emit_report(opt.out_labels, labels, manifest);
  manifest.wall_ms = timer.ms();
  emit_report(opt.out_dets, dets, manifest);

  std::cout << "images      " << config.n_images << "\n"
            << "labels      " << dataset.labels.size() << "\n"
            << "detections  " << dataset.detections.size() << "\n";
}

}  // namespace

void register_synth(CLI::App& app) {
  auto opt = std::make_shared<Options>();
  CLI::App* cmd =
      app.add_subcommand("synth", "deterministic synthetic label/detection dataset");
  cmd->add_option("--out-labels", opt->out_labels, "labels output path (.jsonl)")->required();
  cmd->add_option("--out-dets", opt->out_dets, "detections output path (.jsonl)")->required();
  cmd->add_option("--seed", opt->config.seed, "RNG seed (default 1)");
  cmd->add_option("--images", opt->config.n_images, "number of images (default 100)");
  cmd->add_option("--width-min", opt->config.width_min, "minimum object width px (default 3)");
  cmd->add_option("--width-max", opt->config.width_max, "maximum object width px (default 40)");
  cmd->add_option("--aspect-ratio", opt->config.aspect_ratio,
                  "object height/width ratio (default 3)");
  cmd->add_option("--fp-rate", opt->config.fp_rate,
                  "expected stray false positives per image (default 0.5)");
  cmd->add_option("--miss-rate", opt->config.miss_rate,
                  "probability an object goes undetected (default 0.1)");
  cmd->add_option("--dc-rate", opt->config.dc_rate,
                  "probability an object is tagged don't-care (default 0.1)");
  cmd->add_option("--double-det-rate", opt->config.double_det_rate,
                  "probability a detection gets a duplicate (default 0)");
  cmd->add_option("--jitter", opt->config.jitter,
                  "detection box error as a fraction of extent, at most 0.1 (default 0.05)");
  cmd->add_option("--image-size", opt->image_size, "image size HxW (default 512x2048)");
  cmd->add_option("--mean-objects", opt->config.mean_objects,
                  "mean objects per image (default 4)");
  cmd->add_option("--sequence-length", opt->config.sequence_length,
                  "frames per sequence (default 10)");
  cmd->callback([opt] { run(*opt); });
}

}  // namespace anchorkit::cli
