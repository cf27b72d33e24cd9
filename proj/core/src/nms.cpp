#include <anchorkit/nms.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace anchorkit {

std::vector<FinalDetection> suppress(const std::vector<Detection>& detections,
                                     double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("suppress: iou_threshold must lie in (0, 1]");
  }
  for (const Detection& d : detections) {
    if (!std::isfinite(d.confidence) || d.confidence < 0.0 || d.confidence > 1.0) {
      throw std::invalid_argument("suppress: confidence must lie in [0, 1]");
    }
    for (double s : d.state) {
      if (!std::isfinite(s)) throw std::invalid_argument("suppress: state scores must be finite");
    }
    if (d.image_id != detections.front().image_id) {
      throw std::invalid_argument("suppress: detections from mixed image ids");
    }
  }

  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });

  std::vector<FinalDetection> out;
  std::vector<bool> absorbed(detections.size(), false);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t seed = order[i];
    if (absorbed[seed]) continue;
    const Detection& d = detections[seed];
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const std::size_t other = order[j];
      if (!absorbed[other] && iou(d.box, detections[other].box) >= iou_threshold) {
        absorbed[other] = true;
      }
    }
    const auto best = std::max_element(d.state.begin(), d.state.end());
    out.push_back({d.box, d.confidence,
                   static_cast<State>(std::distance(d.state.begin(), best)), d.image_id});
  }
  return out;
}

}  // namespace anchorkit
