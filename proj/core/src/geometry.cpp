#include "anchorkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace anchorkit {

BoundingBox::BoundingBox(double x_min, double y_min, double x_max, double y_max)
    : x_min(x_min), y_min(y_min), x_max(x_max), y_max(y_max) {
  if (x_min > x_max || y_min > y_max) {
    throw std::invalid_argument("BoundingBox: min corner must not exceed max corner");
  }
}

BoundingBox BoundingBox::from_center(double cx, double cy, double width, double height) {
  if (width < 0.0 || height < 0.0) {
    throw std::invalid_argument("BoundingBox: negative width or height");
  }
  return BoundingBox(cx - 0.5 * width, cy - 0.5 * height, cx + 0.5 * width, cy + 0.5 * height);
}

BoundingBox BoundingBox::from_xywh(double x, double y, double width, double height) {
  if (width < 0.0 || height < 0.0) {
    throw std::invalid_argument("BoundingBox: negative width or height");
  }
  return BoundingBox(x, y, x + width, y + height);
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

double iou_under_shift(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("iou_under_shift: epsilon must be in [0,1), got " +
                                std::to_string(epsilon));
  }
  const double lo = 1.0 - epsilon;
  const double hi = 1.0 + epsilon;
  return (lo * lo) / (hi * hi);
}

StrideAdvice max_allowed_stride(double target_iou, double object_width) {
  if (!(target_iou > 0.0 && target_iou < 1.0)) {
    throw std::invalid_argument("max_allowed_stride: target_iou must be in (0,1), got " +
                                std::to_string(target_iou));
  }
  if (!(object_width > 0.0)) {
    throw std::invalid_argument("max_allowed_stride: object_width must be positive");
  }
  const double epsilon =
      (target_iou - 2.0 * std::sqrt(target_iou) + 1.0) / (1.0 - target_iou);
  StrideAdvice advice;
  advice.target_iou = target_iou;
  advice.epsilon = epsilon;
  advice.max_stride_fraction = 2.0 * epsilon;
  advice.object_width = object_width;
  advice.max_stride_px = advice.max_stride_fraction * object_width;
  return advice;
}

}  // namespace anchorkit
