#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchorkit/geometry.hpp"
#include "commands.hpp"
#include "util.hpp"

namespace anchorkit::cli {

namespace {

struct Options {
  double iou = 0.5;
  double width = 5.0;
  bool as_json = false;
};

void run(const Options& opt) {
  const StrideAdvice advice = max_allowed_stride(opt.iou, opt.width);
  if (opt.as_json) {
    nlohmann::ordered_json out;
    out["target_iou"] = advice.target_iou;
    out["epsilon"] = advice.epsilon;
    out["max_stride_fraction"] = advice.max_stride_fraction;
    out["object_width_px"] = advice.object_width;
    out["max_stride_px"] = advice.max_stride_px;
    std::cout << out.dump(2) << "\n";
    return;
  }
  std::cout << "target IoU           " << format_number(advice.target_iou) << "\n"
            << "epsilon              " << format_number(advice.epsilon) << "\n"
            << "max stride fraction  " << format_number(advice.max_stride_fraction)
            << "  (of object width)\n"
            << "object width         " << format_number(advice.object_width) << " px\n"
            << "max stride           " << format_number(advice.max_stride_px) << " px\n";
}

}  // namespace

void register_stride_advice(CLI::App& app) {
  auto opt = std::make_shared<Options>();
  CLI::App* cmd = app.add_subcommand(
      "stride-advice", "largest prior-box stride that still guarantees a target IoU");
  cmd->add_option("--iou", opt->iou, "target IoU threshold, in (0, 1)")->required();
  cmd->add_option("--width", opt->width, "object width in pixels")->required();
  cmd->add_flag("--json", opt->as_json, "print as JSON instead of text");
  cmd->callback([opt] { run(*opt); });
}

}  // namespace anchorkit::cli
