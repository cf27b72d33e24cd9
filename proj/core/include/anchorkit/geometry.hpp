#pragma once

namespace anchorkit {

/// Axis-aligned box in input-image pixel coordinates. Coordinates are
/// continuous: area = (x_max - x_min) * (y_max - y_min), no half-open
/// pixel convention. Zero-area boxes are legal and score IoU 0 against
/// everything.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  BoundingBox() = default;
  /// Throws std::invalid_argument unless x_min <= x_max and y_min <= y_max.
  BoundingBox(double x_min, double y_min, double x_max, double y_max);

  static BoundingBox from_center(double cx, double cy, double width, double height);
  static BoundingBox from_xywh(double x, double y, double width, double height);

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }

  bool operator==(const BoundingBox&) const = default;
};

double intersection_area(const BoundingBox& a, const BoundingBox& b);

/// Intersection over union. Returns 0 when the union has zero area.
double iou(const BoundingBox& a, const BoundingBox& b);

/// IoU between a square object and a same-size hypothesis displaced by
/// `epsilon` object-widths in both axes, with the union taken as the box
/// circumscribing the pair: (1-e)^2 / (1+e)^2. Equivalently, the exact
/// IoU between the overlap region of the shifted pair and their enclosing
/// square. Slightly conservative against the exact two-box union, so a
/// stride chosen from it never overshoots the requested overlap.
/// Requires 0 <= epsilon < 1.
double iou_under_shift(double epsilon);

/// Prior-grid spacing advice for one target overlap.
struct StrideAdvice {
  double target_iou = 0.0;
  double epsilon = 0.0;              // worst-case center error, fraction of width
  double max_stride_fraction = 0.0;  // 2 * epsilon
  double object_width = 0.0;         // pixels
  double max_stride_px = 0.0;        // max_stride_fraction * object_width

  double max_stride_px_for(double width) const { return max_stride_fraction * width; }
};

/// Largest prior-center spacing that still guarantees `target_iou` for an
/// object of `object_width` pixels. Requires 0 < target_iou < 1 and
/// object_width > 0; target_iou = 1 is rejected since only stride 0
/// achieves it.
StrideAdvice max_allowed_stride(double target_iou, double object_width);

}  // namespace anchorkit
