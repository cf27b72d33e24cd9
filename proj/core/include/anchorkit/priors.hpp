#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <anchorkit/geometry.hpp>
#include <anchorkit/netgraph.hpp>

namespace anchorkit {

/// Full specification of one prior-box layer. Offsets are fractions of a
/// feature cell; a box of width w has height aspect_ratio * w. One aspect
/// ratio per layout; multiple ratios are composed as multiple layouts.
struct PriorLayout {
  std::string layer_name;  // informational, set when resolved from a net config
  std::int64_t feature_h = 0;
  std::int64_t feature_w = 0;
  double cumulative_stride = 0.0;  // input pixels per feature cell
  std::vector<double> widths;      // pixels
  double aspect_ratio = 0.0;       // height / width
  std::vector<double> offsets_x;   // ascending, each in [0, 1]
  std::vector<double> offsets_y;

  std::size_t priors_per_cell() const;
  std::size_t total_priors() const;

  /// Throws std::invalid_argument on empty widths/offsets, out-of-range or
  /// unsorted offsets, or nonpositive sizes/stride/ratio.
  void validate() const;
};

/// Where a generated box came from within its layout.
struct PriorProvenance {
  std::int64_t cell_x = 0;
  std::int64_t cell_y = 0;
  std::uint32_t offset_x_index = 0;
  std::uint32_t offset_y_index = 0;
  std::uint32_t width_index = 0;
};

struct PriorBoxSet {
  std::vector<BoundingBox> boxes;
  std::vector<PriorProvenance> provenance;  // parallel to boxes

  std::size_t size() const { return boxes.size(); }
};

/// Materializes every prior of the layout. A box's center is its cell
/// origin plus offset, mapped to pixels: ((cell_x + o_x) / w_f * input_w,
/// (cell_y + o_y) / h_f * input_h). Enumeration order is row-major by cell
/// (y outer, x inner), then offset (y outer, x inner), then width. Boxes
/// may extend past the image border and are not clipped; clipping would
/// distort aspect ratios. Throws std::invalid_argument when input size and
/// feature_size * stride disagree by more than a factor of two.
PriorBoxSet generate(const PriorLayout& layout, double input_h, double input_w);

struct EffectiveStride {
  double dx = 0.0;
  double dy = 0.0;
};

/// Smallest center-to-center spacing of generated priors per axis:
/// cumulative_stride times the minimum gap between consecutive offsets,
/// including the wrap onto the next cell. A single offset reproduces the
/// plain one-box-per-cell spacing.
EffectiveStride effective_stride(const PriorLayout& layout);

/// Offsets {(i + 0.5) * spacing} for every i keeping the value below 1;
/// spacing 0.16 yields {0.08, 0.24, 0.40, 0.56, 0.72, 0.88}. Requires
/// spacing in (0, 1].
std::vector<double> offset_grid(double spacing);

struct OffsetGrids {
  std::vector<double> x;
  std::vector<double> y;
};

/// Offset pair whose vertical spacing is aspect_ratio times the horizontal
/// one, so boxes of height aspect_ratio * width tolerate the same relative
/// center error on both axes. A vertical spacing above one whole cell
/// degenerates to the single centered offset.
OffsetGrids coupled_offset_grid(double spacing_x, double aspect_ratio);

/// Largest IoU any prior of the layout can reach against `gt`, without
/// materializing boxes. The intersection factors per axis and each factor
/// only shrinks with center distance, so per width it suffices to test the
/// achievable center nearest the target on each axis independently.
double best_prior_iou(const PriorLayout& layout, double input_h, double input_w,
                      const BoundingBox& gt);

/// Parses a `.priorcfg` document: JSON {layer_name, widths[], aspect_ratio,
/// offsets_x[] | offset_spacing_x, offsets_y[] | offset_spacing_y |
/// couple_offsets_y} resolved against an analyzed graph for feature size
/// and stride.
PriorLayout load_priorcfg_text(const std::string& text, const NetAnalysis& net,
                               const std::string& source_name = "priorcfg");
PriorLayout load_priorcfg_file(const std::string& path, const NetAnalysis& net);

}  // namespace anchorkit
