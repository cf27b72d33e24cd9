#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchorkit/eval.hpp"
#include "anchorkit/matching.hpp"
#include "anchorkit/netgraph.hpp"
#include "anchorkit/priors.hpp"
#include "anchorkit/records.hpp"
#include "commands.hpp"
#include "util.hpp"

namespace anchorkit::cli {

namespace {

struct Options {
  std::string netcfg;
  std::string priorcfg;
  std::string labels;
  std::string input = "512x2048";
  double iou = 0.3;
  double bin = 1.0;
  std::string emit;
};

void run(const Options& opt) {
  WallTimer timer;
  RunManifest manifest = make_manifest("coverage");
  add_input(manifest, opt.netcfg);
  add_input(manifest, opt.priorcfg);
  add_input(manifest, opt.labels);

  const Size2d input = parse_size(opt.input);
  const NetGraph graph = NetGraph::from_file(opt.netcfg);
  const NetAnalysis analysis = analyze(graph, input.h, input.w);
  const PriorLayout layout = load_priorcfg_file(opt.priorcfg, analysis);

  // Don't-care annotations neither attract priors nor count in coverage;
  // the tag rule matches evaluation's default (min-width filtering is an
  // evaluation concern, not a coverage one).
  EvalConfig dc_config;
  dc_config.iou_threshold = opt.iou;

  std::vector<BoundingBox> boxes;
  std::vector<double> best;
  std::int64_t dont_care = 0;
  stream_labels_file(opt.labels, [&](GroundTruthRecord&& record) {
    if (is_dont_care(record, dc_config)) {
      ++dont_care;
      return;
    }
    best.push_back(best_prior_iou(layout, static_cast<double>(input.h),
                                  static_cast<double>(input.w), record.box));
    boxes.push_back(record.box);
  });

  const CoverageHistogram histogram = coverage_histogram(best, boxes, opt.iou, opt.bin);
  const std::int64_t total = histogram.total();
  const std::int64_t covered = histogram.covered_total();

  std::cout << "ground truths    " << total << " (+" << dont_care << " don't-care)\n"
            << "covered at IoU " << format_number(opt.iou) << "  " << covered;
  if (total > 0) {
    std::cout << "  (" << format_number(100.0 * static_cast<double>(covered) /
                                        static_cast<double>(total))
              << "%)";
  }
  std::cout << "\n";

  if (opt.emit.empty()) return;

  std::string report = csv_row({"width_lo", "width_hi", "covered", "uncovered", "recall"});
  for (const CoverageBin& bin : histogram.bins) {
    const std::int64_t n = bin.covered + bin.uncovered;
    report += csv_row({format_number(bin.width_lo), format_number(bin.width_hi),
                       std::to_string(bin.covered), std::to_string(bin.uncovered),
                       n > 0 ? format_number(static_cast<double>(bin.covered) /
                                             static_cast<double>(n))
                             : ""});
  }

  nlohmann::ordered_json config;
  config["input"] = opt.input;
  config["iou"] = opt.iou;
  config["bin"] = opt.bin;
  manifest.config_json = config.dump();
  manifest.wall_ms = timer.ms();
  emit_report(opt.emit, report, manifest);
  log_debug("coverage: wrote " + opt.emit);
}

}  // namespace

void register_coverage(CLI::App& app) {
  auto opt = std::make_shared<Options>();
  CLI::App* cmd = app.add_subcommand(
      "coverage", "fraction of ground truths reachable by a prior layout, by width");
  cmd->add_option("netcfg", opt->netcfg, "network config (.netcfg)")->required();
  cmd->add_option("priorcfg", opt->priorcfg, "prior layout config (.priorcfg)")->required();
  cmd->add_option("labels", opt->labels, "ground-truth labels (.jsonl)")->required();
  cmd->add_option("--input", opt->input, "input size HxW (default 512x2048)");
  cmd->add_option("--iou", opt->iou, "coverage IoU threshold (default 0.3)");
  cmd->add_option("--bin", opt->bin, "histogram bin width in pixels (default 1)");
  cmd->add_option("--emit", opt->emit, "write the width histogram as CSV to this file");
  cmd->callback([opt] { run(*opt); });
}

}  // namespace anchorkit::cli
