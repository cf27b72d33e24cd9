#pragma once

#include <array>
#include <string>
#include <vector>

#include <anchorkit/geometry.hpp>
#include <anchorkit/state.hpp>

namespace anchorkit {

/// Raw per-box prediction entering suppression.
struct Detection {
  BoundingBox box;
  double confidence = 0.0;                 // in [0, 1]
  std::array<double, kStateCount> state{};  // off, red, yellow, green scores
  std::string image_id;
};

struct FinalDetection {
  BoundingBox box;
  double confidence = 0.0;
  State state = State::off;
  std::string image_id;
};

/// Greedy class-independent non-maximum suppression over one image.
/// Detections are visited by descending confidence (ties: lower input
/// index); each visit seeds a cluster absorbing every remaining detection
/// whose IoU with the seed reaches the threshold. The survivor keeps the
/// seed's box and confidence; its state is the argmax of the seed's state
/// scores, the seed being the highest-confidence cluster member. Output
/// stays sorted by descending confidence. Throws std::invalid_argument on
/// mixed image ids, non-finite scores, confidence outside [0, 1], or a
/// threshold outside (0, 1].
std::vector<FinalDetection> suppress(const std::vector<Detection>& detections,
                                     double iou_threshold = 0.35);

}  // namespace anchorkit
