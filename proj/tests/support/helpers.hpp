#pragma once

#include <algorithm>
#include <vector>

#include <anchorkit/geometry.hpp>
#include <anchorkit/synth.hpp>

namespace anchorkit::test {

inline BoundingBox random_box(SplitMix64& rng, double span = 100.0, double min_extent = 0.5,
                              double max_extent = 30.0) {
  const double w = rng.uniform(min_extent, max_extent);
  const double h = rng.uniform(min_extent, max_extent);
  const double x = rng.uniform(0.0, span);
  const double y = rng.uniform(0.0, span);
  return BoundingBox::from_xywh(x, y, w, h);
}

inline BoundingBox intersection_box(const BoundingBox& a, const BoundingBox& b) {
  return BoundingBox(std::max(a.x_min, b.x_min), std::max(a.y_min, b.y_min),
                     std::min(a.x_max, b.x_max), std::min(a.y_max, b.y_max));
}

inline BoundingBox hull_box(const BoundingBox& a, const BoundingBox& b) {
  return BoundingBox(std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min),
                     std::max(a.x_max, b.x_max), std::max(a.y_max, b.y_max));
}

}  // namespace anchorkit::test
