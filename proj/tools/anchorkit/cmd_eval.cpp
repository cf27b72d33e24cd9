#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchorkit/eval.hpp"
#include "anchorkit/records.hpp"
#include "commands.hpp"
#include "util.hpp"

namespace anchorkit::cli {

namespace {

struct Options {
  std::string labels;
  std::string dets;
  double iou = 0.3;
  double min_width = 0.0;
  int grid = 1000;
  std::string state;
  double operating_fppi = 1.0;
  double width_bin = 1.0;
  bool print_lamr = false;
  bool as_json = false;
  std::string emit_roc;
  std::string emit_width;
  std::string emit_track;
};

std::string render_roc(const RocCurve& curve) {
  std::string out = csv_row({"confidence", "fppi", "miss_rate"});
  for (const RocPoint& point : curve.points) {
    out += csv_row({format_number(point.confidence), format_number(point.fppi),
                    format_number(point.miss_rate)});
  }
  return out;
}

std::string render_width(const WidthRecall& width) {
  std::string out =
      csv_row({"width_lo", "width_hi", "detected", "total", "recall", "confidence", "fppi"});
  for (const WidthRecallBin& bin : width.bins) {
    out += csv_row({format_number(bin.width_lo), format_number(bin.width_hi),
                    std::to_string(bin.detected), std::to_string(bin.total),
                    format_number(bin.recall()), format_number(width.confidence),
                    format_number(width.fppi)});
  }
  return out;
}

std::string render_track(const TrackRecall& tracks) {
  std::string out = csv_row({"track_id", "occurrences", "detected", "p_track"});
  for (const TrackEntry& entry : tracks.tracks) {
    out += csv_row({entry.track_id, std::to_string(entry.occurrences),
                    std::to_string(entry.detected), format_number(entry.p_track)});
  }
  return out;
}

void run(const Options& opt) {
  WallTimer timer;
  RunManifest manifest = make_manifest("eval");
  add_input(manifest, opt.labels);
  add_input(manifest, opt.dets);

  EvalConfig config;
  config.iou_threshold = opt.iou;
  config.min_width = opt.min_width;
  if (!opt.state.empty()) config.state_filter = parse_state(opt.state);

  Evaluator evaluator(config, opt.grid);
  stream_labels_file(opt.labels, [&](GroundTruthRecord&& record) {
    evaluator.add_label(std::move(record));
  });
  stream_detections_file(opt.dets, [&](PredictionRecord&& record) {
    evaluator.add_detection(record);
  });
  const EvalReport report = evaluator.finalize(opt.operating_fppi, opt.width_bin);

  nlohmann::ordered_json config_snapshot;
  config_snapshot["iou"] = opt.iou;
  config_snapshot["min_width"] = opt.min_width;
  config_snapshot["grid"] = opt.grid;
  if (!opt.state.empty()) config_snapshot["state"] = opt.state;
  config_snapshot["operating_fppi"] = opt.operating_fppi;
  config_snapshot["width_bin"] = opt.width_bin;
  manifest.config_json = config_snapshot.dump();
  manifest.wall_ms = timer.ms();

  if (!opt.emit_roc.empty()) emit_report(opt.emit_roc, render_roc(report.roc), manifest);
  if (!opt.emit_width.empty()) emit_report(opt.emit_width, render_width(report.width), manifest);
  if (!opt.emit_track.empty()) emit_report(opt.emit_track, render_track(report.tracks), manifest);

  if (opt.as_json) {
    nlohmann::ordered_json out;
    out["images"] = report.totals.images;
    out["labels"] = report.totals.labels;
    out["dont_care"] = report.totals.dont_care;
    out["detections"] = report.totals.detections;
    out["operating_fppi"] = report.operating_fppi;
    out["operating_confidence"] = report.width.confidence;
    out["tp"] = report.totals.tp;
    out["fp"] = report.totals.fp;
    out["fn"] = report.totals.fn;
    out["lamr"] = report.lamr;
    out["track_high_share"] = report.tracks.high_share;
    out["tracks_missing_id"] = report.tracks.missing_track_records;
    std::cout << out.dump(2) << "\n";
    return;
  }

  std::cout << "images           " << report.totals.images << "\n"
            << "labels           " << report.totals.labels << "  (" << report.totals.dont_care
            << " don't-care)\n"
            << "detections       " << report.totals.detections << "\n"
            << "operating point  FPPI " << format_number(report.width.fppi) << " at confidence "
            << format_number(report.width.confidence) << "  (requested "
            << format_number(report.operating_fppi) << ")\n"
            << "tp / fp / fn     " << report.totals.tp << " / " << report.totals.fp << " / "
            << report.totals.fn << "\n"
            << "track P>=0.9     " << format_number(report.tracks.high_share) << "  ("
            << report.tracks.missing_track_records << " records lack track ids)\n";
  if (opt.print_lamr) {
    std::cout << "lamr             " << format_number(report.lamr) << "\n";
  }
}

}  // namespace

void register_eval(CLI::App& app) {
  auto opt = std::make_shared<Options>();
  CLI::App* cmd = app.add_subcommand(
      "eval", "score detections against labels: ROC, LAMR, width and track recall");
  cmd->add_option("labels", opt->labels, "ground-truth labels (.jsonl)")->required();
  cmd->add_option("dets", opt->dets, "final detections (.jsonl)")->required();
  cmd->add_option("--iou", opt->iou, "true-positive IoU threshold (default 0.3)");
  cmd->add_option("--min-width", opt->min_width,
                  "ground truths narrower than this become don't-care (default 0)");
  cmd->add_option("--grid", opt->grid, "confidence grid resolution (default 1000)");
  cmd->add_option("--state", opt->state,
                  "evaluate one state only (off/red/yellow/green); default all states");
  cmd->add_option("--operating-fppi", opt->operating_fppi,
                  "FPPI budget behind width/track sections (default 1.0)");
  cmd->add_option("--width-bin", opt->width_bin, "width histogram bin in pixels (default 1)");
  cmd->add_flag("--lamr", opt->print_lamr, "print the log-average miss rate");
  cmd->add_flag("--json", opt->as_json, "print the summary as JSON");
  cmd->add_option("--emit-roc", opt->emit_roc, "write the ROC curve as CSV");
  cmd->add_option("--emit-width", opt->emit_width, "write per-width recall as CSV");
  cmd->add_option("--emit-track", opt->emit_track, "write per-track recall as CSV");
  cmd->callback([opt] { run(*opt); });
}

}  // namespace anchorkit::cli
