#include <anchorkit/priors.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include <anchorkit/error.hpp>

namespace anchorkit {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void check_offsets(const std::vector<double>& offsets, const char* axis) {
  require(!offsets.empty(), std::string("prior layout: offsets_") + axis + " is empty");
  double prev = -1.0;
  for (double o : offsets) {
    require(std::isfinite(o) && o >= 0.0 && o <= 1.0,
            std::string("prior layout: offsets_") + axis + " must lie in [0, 1]");
    require(o > prev, std::string("prior layout: offsets_") + axis +
                          " must be strictly ascending");
    prev = o;
  }
}

double min_offset_gap(const std::vector<double>& offsets) {
  if (offsets.size() == 1) return 1.0;
  double gap = offsets.front() + 1.0 - offsets.back();  // wrap onto the next cell
  for (std::size_t i = 1; i < offsets.size(); ++i) {
    gap = std::min(gap, offsets[i] - offsets[i - 1]);
  }
  return gap;
}

// Overlap of a length-`extent` interval centered at `center` with [lo, hi].
double interval_overlap(double center, double extent, double lo, double hi) {
  const double half = 0.5 * extent;
  return std::min(center + half, hi) - std::max(center - half, lo);
}

}  // namespace

std::size_t PriorLayout::priors_per_cell() const {
  return widths.size() * offsets_x.size() * offsets_y.size();
}

std::size_t PriorLayout::total_priors() const {
  return static_cast<std::size_t>(feature_h) * static_cast<std::size_t>(feature_w) *
         priors_per_cell();
}

void PriorLayout::validate() const {
  require(feature_h >= 1 && feature_w >= 1, "prior layout: feature size must be at least 1x1");
  require(std::isfinite(cumulative_stride) && cumulative_stride > 0.0,
          "prior layout: cumulative_stride must be positive");
  require(!widths.empty(), "prior layout: widths is empty");
  for (double w : widths) {
    require(std::isfinite(w) && w > 0.0, "prior layout: widths must be positive");
  }
  require(std::isfinite(aspect_ratio) && aspect_ratio > 0.0,
          "prior layout: aspect_ratio must be positive");
  check_offsets(offsets_x, "x");
  check_offsets(offsets_y, "y");
}

PriorBoxSet generate(const PriorLayout& layout, double input_h, double input_w) {
  layout.validate();
  require(std::isfinite(input_h) && input_h > 0.0 && std::isfinite(input_w) && input_w > 0.0,
          "generate: input size must be positive");
  const double expect_w = static_cast<double>(layout.feature_w) * layout.cumulative_stride;
  const double expect_h = static_cast<double>(layout.feature_h) * layout.cumulative_stride;
  require(input_w > 0.5 * expect_w && input_w < 2.0 * expect_w &&
              input_h > 0.5 * expect_h && input_h < 2.0 * expect_h,
          "generate: input size inconsistent with feature_size * stride");

  const double wf = static_cast<double>(layout.feature_w);
  const double hf = static_cast<double>(layout.feature_h);

  PriorBoxSet out;
  out.boxes.reserve(layout.total_priors());
  out.provenance.reserve(layout.total_priors());
  for (std::int64_t cy = 0; cy < layout.feature_h; ++cy) {
    for (std::int64_t cx = 0; cx < layout.feature_w; ++cx) {
      for (std::size_t oy = 0; oy < layout.offsets_y.size(); ++oy) {
        const double center_y =
            (static_cast<double>(cy) + layout.offsets_y[oy]) / hf * input_h;
        for (std::size_t ox = 0; ox < layout.offsets_x.size(); ++ox) {
          const double center_x =
              (static_cast<double>(cx) + layout.offsets_x[ox]) / wf * input_w;
          for (std::size_t wi = 0; wi < layout.widths.size(); ++wi) {
            const double w = layout.widths[wi];
            out.boxes.push_back(
                BoundingBox::from_center(center_x, center_y, w, layout.aspect_ratio * w));
            out.provenance.push_back({cx, cy, static_cast<std::uint32_t>(ox),
                                      static_cast<std::uint32_t>(oy),
                                      static_cast<std::uint32_t>(wi)});
          }
        }
      }
    }
  }
  return out;
}

EffectiveStride effective_stride(const PriorLayout& layout) {
  layout.validate();
  return {layout.cumulative_stride * min_offset_gap(layout.offsets_x),
          layout.cumulative_stride * min_offset_gap(layout.offsets_y)};
}

std::vector<double> offset_grid(double spacing) {
  require(std::isfinite(spacing) && spacing > 0.0 && spacing <= 1.0,
          "offset_grid: spacing must lie in (0, 1]");
  require(spacing >= 1e-6, "offset_grid: spacing too small");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double value = (static_cast<double>(i) + 0.5) * spacing;
    if (value >= 1.0) break;
    out.push_back(value);
  }
  return out;
}

OffsetGrids coupled_offset_grid(double spacing_x, double aspect_ratio) {
  require(std::isfinite(aspect_ratio) && aspect_ratio > 0.0,
          "coupled_offset_grid: aspect_ratio must be positive");
  OffsetGrids grids;
  grids.x = offset_grid(spacing_x);
  grids.y = offset_grid(std::min(1.0, spacing_x * aspect_ratio));
  return grids;
}

double best_prior_iou(const PriorLayout& layout, double input_h, double input_w,
                      const BoundingBox& gt) {
  layout.validate();
  require(std::isfinite(input_h) && input_h > 0.0 && std::isfinite(input_w) && input_w > 0.0,
          "best_prior_iou: input size must be positive");
  const double gt_area = gt.area();
  const double wf = static_cast<double>(layout.feature_w);
  const double hf = static_cast<double>(layout.feature_h);

  // Best overlap along one axis for a prior of the given extent: try, for
  // each offset, the two cells bracketing the ideal fractional cell index.
  const auto best_axis_overlap = [](double target_center, double extent, double lo, double hi,
                                    const std::vector<double>& offsets, double cells,
                                    double input_extent) {
    double best = 0.0;
    for (double o : offsets) {
      const double ideal = target_center * cells / input_extent - o;
      const double base = std::floor(ideal);
      for (double cell : {base, base + 1.0}) {
        const double clamped = std::clamp(cell, 0.0, cells - 1.0);
        const double center = (clamped + o) / cells * input_extent;
        best = std::max(best, interval_overlap(center, extent, lo, hi));
      }
    }
    return best;
  };

  double best = 0.0;
  for (double w : layout.widths) {
    const double h = layout.aspect_ratio * w;
    const double ix = best_axis_overlap(gt.center_x(), w, gt.x_min, gt.x_max, layout.offsets_x,
                                        wf, input_w);
    const double iy = best_axis_overlap(gt.center_y(), h, gt.y_min, gt.y_max, layout.offsets_y,
                                        hf, input_h);
    const double inter = std::max(0.0, ix) * std::max(0.0, iy);
    const double uni = w * h + gt_area - inter;
    if (uni > 0.0) best = std::max(best, inter / uni);
  }
  return best;
}

namespace {

using nlohmann::json;

std::vector<double> number_array(const json& value, const std::string& where,
                                 const std::string& field) {
  if (!value.is_array() || value.empty()) {
    throw ParseError(where, "'" + field + "' must be a non-empty array of numbers");
  }
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& item : value) {
    if (!item.is_number()) {
      throw ParseError(where, "'" + field + "' must contain numbers only");
    }
    out.push_back(item.get<double>());
  }
  return out;
}

}  // namespace

PriorLayout load_priorcfg_text(const std::string& text, const NetAnalysis& net,
                               const std::string& source_name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source_name, e.what());
  }
  if (!doc.is_object()) throw ParseError(source_name, "top level must be an object");

  static const char* known[] = {"layer_name",       "widths",          "aspect_ratio",
                                "offsets_x",        "offsets_y",       "offset_spacing_x",
                                "offset_spacing_y", "couple_offsets_y"};
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) == std::end(known)) {
      throw ParseError(source_name, "unknown field '" + key + "'");
    }
  }

  if (!doc.contains("layer_name") || !doc["layer_name"].is_string()) {
    throw ParseError(source_name, "'layer_name' (string) is required");
  }
  if (!doc.contains("widths")) throw ParseError(source_name, "'widths' is required");
  if (!doc.contains("aspect_ratio") || !doc["aspect_ratio"].is_number()) {
    throw ParseError(source_name, "'aspect_ratio' (number) is required");
  }

  PriorLayout layout;
  layout.layer_name = doc["layer_name"].get<std::string>();
  layout.widths = number_array(doc["widths"], source_name, "widths");
  layout.aspect_ratio = doc["aspect_ratio"].get<double>();

  if (!net.has(layout.layer_name)) {
    throw ParseError(source_name, "layer '" + layout.layer_name + "' not present in the network");
  }
  const NodeAnalysis& node = net.node(layout.layer_name);
  layout.feature_h = node.feature_h;
  layout.feature_w = node.feature_w;
  layout.cumulative_stride = static_cast<double>(node.cumulative_stride);

  const bool has_ox = doc.contains("offsets_x");
  const bool has_sx = doc.contains("offset_spacing_x");
  if (has_ox == has_sx) {
    throw ParseError(source_name, "exactly one of 'offsets_x' or 'offset_spacing_x' is required");
  }
  double spacing_x = 0.0;
  if (has_ox) {
    layout.offsets_x = number_array(doc["offsets_x"], source_name, "offsets_x");
  } else {
    if (!doc["offset_spacing_x"].is_number()) {
      throw ParseError(source_name, "'offset_spacing_x' must be a number");
    }
    spacing_x = doc["offset_spacing_x"].get<double>();
    try {
      layout.offsets_x = offset_grid(spacing_x);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source_name, e.what());
    }
  }

  const bool has_oy = doc.contains("offsets_y");
  const bool has_sy = doc.contains("offset_spacing_y");
  const bool couple = doc.contains("couple_offsets_y") &&
                      (doc["couple_offsets_y"].is_boolean() ? doc["couple_offsets_y"].get<bool>()
                                                            : throw ParseError(
                                                                  source_name,
                                                                  "'couple_offsets_y' must be a "
                                                                  "boolean"));
  const int y_specs = int(has_oy) + int(has_sy) + int(couple);
  if (y_specs != 1) {
    throw ParseError(source_name,
                     "exactly one of 'offsets_y', 'offset_spacing_y', or "
                     "'couple_offsets_y' is required");
  }
  try {
    if (has_oy) {
      layout.offsets_y = number_array(doc["offsets_y"], source_name, "offsets_y");
    } else if (has_sy) {
      if (!doc["offset_spacing_y"].is_number()) {
        throw ParseError(source_name, "'offset_spacing_y' must be a number");
      }
      layout.offsets_y = offset_grid(doc["offset_spacing_y"].get<double>());
    } else {
      if (!has_sx) {
        throw ParseError(source_name, "'couple_offsets_y' requires 'offset_spacing_x'");
      }
      layout.offsets_y = coupled_offset_grid(spacing_x, layout.aspect_ratio).y;
    }
    layout.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(source_name, e.what());
  }
  return layout;
}

PriorLayout load_priorcfg_file(const std::string& path, const NetAnalysis& net) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_priorcfg_text(buffer.str(), net, path);
}

}  // namespace anchorkit
