#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchorkit/netgraph.hpp"
#include "anchorkit/priors.hpp"
#include "commands.hpp"
#include "util.hpp"

namespace anchorkit::cli {

namespace {

struct Options {
  std::string netcfg;
  std::string priorcfg;
  std::string input = "512x2048";
  std::string emit;
};

void run(const Options& opt) {
  WallTimer timer;
  RunManifest manifest = make_manifest("priors");
  add_input(manifest, opt.netcfg);
  add_input(manifest, opt.priorcfg);

  const Size2d input = parse_size(opt.input);
  const NetGraph graph = NetGraph::from_file(opt.netcfg);
  const NetAnalysis analysis = analyze(graph, input.h, input.w);
  const PriorLayout layout = load_priorcfg_file(opt.priorcfg, analysis);
  const EffectiveStride stride = effective_stride(layout);

  std::cout << "layer            " << layout.layer_name << "\n"
            << "feature grid     " << layout.feature_h << "x" << layout.feature_w << "\n"
            << "cell stride      " << format_number(layout.cumulative_stride) << " px\n"
            << "priors per cell  " << layout.priors_per_cell() << "\n"
            << "total priors     " << layout.total_priors() << "\n"
            << "effective stride " << format_number(stride.dx) << " x "
            << format_number(stride.dy) << " px\n";

  if (opt.emit.empty()) return;

  const PriorBoxSet set = generate(layout, static_cast<double>(input.h),
                                   static_cast<double>(input.w));
  std::string report = csv_row({"index", "cell_x", "cell_y", "offset_x_index", "offset_y_index",
                                "width_index", "x_min", "y_min", "x_max", "y_max"});
  for (std::size_t i = 0; i < set.size(); ++i) {
    const BoundingBox& box = set.boxes[i];
    const PriorProvenance& origin = set.provenance[i];
    report += csv_row({std::to_string(i), std::to_string(origin.cell_x),
                       std::to_string(origin.cell_y), std::to_string(origin.offset_x_index),
                       std::to_string(origin.offset_y_index), std::to_string(origin.width_index),
                       format_number(box.x_min), format_number(box.y_min),
                       format_number(box.x_max), format_number(box.y_max)});
  }

  nlohmann::ordered_json config;
  config["input"] = opt.input;
  manifest.config_json = config.dump();
  manifest.wall_ms = timer.ms();
  emit_report(opt.emit, report, manifest);
  log_debug("priors: wrote " + std::to_string(set.size()) + " boxes to " + opt.emit);
}

}  // namespace

void register_priors(CLI::App& app) {
  auto opt = std::make_shared<Options>();
  CLI::App* cmd = app.add_subcommand("priors", "materialize a prior-box layout");
  cmd->add_option("netcfg", opt->netcfg, "network config (.netcfg)")->required();
  cmd->add_option("priorcfg", opt->priorcfg, "prior layout config (.priorcfg)")->required();
  cmd->add_option("--input", opt->input, "input size HxW (default 512x2048)");
  cmd->add_option("--emit", opt->emit, "write all boxes as CSV to this file");
  cmd->callback([opt] { run(*opt); });
}

}  // namespace anchorkit::cli
