#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchorkit/netgraph.hpp"
#include "commands.hpp"
#include "util.hpp"

namespace anchorkit::cli {

namespace {

struct Options {
  std::string config;
  std::string input = "512x2048";
  bool table_only = false;
  std::string format = "text";
  std::string emit;
};

std::vector<const NodeAnalysis*> selected_rows(const NetAnalysis& analysis, bool table_only) {
  std::vector<const NodeAnalysis*> rows;
  for (const NodeAnalysis& node : analysis.nodes) {
    if (!table_only || node.report) rows.push_back(&node);
  }
  return rows;
}

std::string render_text(const std::vector<const NodeAnalysis*>& rows) {
  std::size_t name_width = 5;
  for (const NodeAnalysis* row : rows) name_width = std::max(name_width, row->name.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_width) + 2) << "layer" << std::right
      << std::setw(8) << "height" << std::setw(8) << "width" << std::setw(8) << "stride"
      << std::setw(8) << "rf_min" << std::setw(8) << "rf_max" << "\n";
  for (const NodeAnalysis* row : rows) {
    out << std::left << std::setw(static_cast<int>(name_width) + 2) << row->name << std::right
        << std::setw(8) << row->feature_h << std::setw(8) << row->feature_w << std::setw(8)
        << row->cumulative_stride << std::setw(8) << row->rf_min << std::setw(8) << row->rf_max
        << "\n";
  }
  return out.str();
}

std::string render_csv(const std::vector<const NodeAnalysis*>& rows) {
  std::string out = csv_row({"layer", "kind", "feature_h", "feature_w", "stride", "rf_min", "rf_max"});
  for (const NodeAnalysis* row : rows) {
    out += csv_row({row->name, to_string(row->kind), std::to_string(row->feature_h),
                    std::to_string(row->feature_w), std::to_string(row->cumulative_stride),
                    std::to_string(row->rf_min), std::to_string(row->rf_max)});
  }
  return out;
}

std::string render_json(const NetAnalysis& analysis,
                        const std::vector<const NodeAnalysis*>& rows) {
  nlohmann::ordered_json out;
  out["input_h"] = analysis.input_h;
  out["input_w"] = analysis.input_w;
  out["layers"] = nlohmann::ordered_json::array();
  for (const NodeAnalysis* row : rows) {
    nlohmann::ordered_json entry;
    entry["layer"] = row->name;
    entry["kind"] = to_string(row->kind);
    entry["feature_h"] = row->feature_h;
    entry["feature_w"] = row->feature_w;
    entry["stride"] = row->cumulative_stride;
    entry["rf_min"] = row->rf_min;
    entry["rf_max"] = row->rf_max;
    out["layers"].push_back(std::move(entry));
  }
  return out.dump(2) + "\n";
}

void run(const Options& opt) {
  WallTimer timer;
  RunManifest manifest = make_manifest("rf");
  add_input(manifest, opt.config);

  const Size2d input = parse_size(opt.input);
  const NetGraph graph = NetGraph::from_file(opt.config);
  const NetAnalysis analysis = analyze(graph, input.h, input.w);
  const auto rows = selected_rows(analysis, opt.table_only);

  std::string report;
  if (opt.format == "text") {
    report = render_text(rows);
  } else if (opt.format == "csv") {
    report = render_csv(rows);
  } else if (opt.format == "json") {
    report = render_json(analysis, rows);
  } else {
    throw std::invalid_argument("unknown format '" + opt.format + "' (text, csv, json)");
  }

  if (opt.emit.empty()) {
    std::cout << report;
    return;
  }
  nlohmann::ordered_json config;
  config["input"] = opt.input;
  config["table"] = opt.table_only;
  config["format"] = opt.format;
  manifest.config_json = config.dump();
  manifest.wall_ms = timer.ms();
  emit_report(opt.emit, report, manifest);
  log_debug("rf: wrote " + opt.emit);
}

}  // namespace

void register_rf(CLI::App& app) {
  auto opt = std::make_shared<Options>();
  CLI::App* cmd =
      app.add_subcommand("rf", "per-layer stride, receptive field, and feature-map size");
  cmd->add_option("config", opt->config, "network config (.netcfg)")->required();
  cmd->add_option("--input", opt->input, "input size HxW (default 512x2048)");
  cmd->add_flag("--table", opt->table_only, "only layers flagged report:true");
  cmd->add_option("--format", opt->format, "text, csv, or json (default text)");
  cmd->add_option("--emit", opt->emit, "write the report to this file (with manifest sidecar)");
  cmd->callback([opt] { run(*opt); });
}

}  // namespace anchorkit::cli
