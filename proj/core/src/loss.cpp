#include <anchorkit/loss.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace anchorkit {

namespace {

double smooth_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

// -log softmax(logits)[target], stabilized through the max logit.
template <std::size_t N>
double softmax_cross_entropy(const std::array<double, N>& logits, std::size_t target) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - m);
  return m + std::log(sum) - logits[target];
}

// Per-class sigmoid cross-entropy in the overflow-safe form
// max(s, 0) - s * t + log(1 + exp(-|s|)).
double sigmoid_cross_entropy(double logit, double target) {
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

void check_sizes(std::size_t priors, std::size_t rows, std::size_t matches, std::size_t gt_boxes,
                 std::size_t gt_states) {
  if (rows != priors) {
    throw std::invalid_argument("evaluate_loss: one prediction row per prior required");
  }
  if (matches != priors) {
    throw std::invalid_argument("evaluate_loss: match result covers a different prior set");
  }
  if (gt_states != gt_boxes) {
    throw std::invalid_argument("evaluate_loss: one state per ground truth required");
  }
}

// Indices of the negatives to include in the confidence loss: either all
// unmatched priors, or the ratio * positives highest-background-loss ones
// (ties keep the lower index).
std::vector<std::size_t> select_negatives(const std::vector<double>& background_loss,
                                          const std::vector<std::size_t>& unmatched,
                                          std::size_t positives, const LossConfig& config) {
  if (config.negatives == NegativesPolicy::all_negatives) return unmatched;
  const auto quota = static_cast<std::size_t>(
      std::floor(config.negative_ratio * static_cast<double>(positives)));
  std::vector<std::size_t> picked = unmatched;
  std::stable_sort(picked.begin(), picked.end(), [&](std::size_t a, std::size_t b) {
    return background_loss[a] > background_loss[b];
  });
  if (picked.size() > quota) picked.resize(quota);
  return picked;
}

void finalize(LossBreakdown& out, const LossConfig& config) {
  out.alpha = config.alpha;
  out.beta = config.beta;
  out.total = out.matched > 0 ? (out.conf + config.alpha * out.loc + config.beta * out.state) /
                                    static_cast<double>(out.matched)
                              : 0.0;
}

}  // namespace

std::array<double, 4> encode_offsets(const BoundingBox& prior, const BoundingBox& gt,
                                     const BoxVariances& variances) {
  if (!(prior.width() > 0.0 && prior.height() > 0.0)) {
    throw std::invalid_argument("encode_offsets: prior must have positive extent");
  }
  if (!(gt.width() > 0.0 && gt.height() > 0.0)) {
    throw std::invalid_argument("encode_offsets: ground truth must have positive extent");
  }
  return {
      (gt.center_x() - prior.center_x()) / prior.width() / variances.center,
      (gt.center_y() - prior.center_y()) / prior.height() / variances.center,
      std::log(gt.width() / prior.width()) / variances.size,
      std::log(gt.height() / prior.height()) / variances.size,
  };
}

BoundingBox decode_offsets(const BoundingBox& prior, const std::array<double, 4>& offsets,
                           const BoxVariances& variances) {
  if (!(prior.width() > 0.0 && prior.height() > 0.0)) {
    throw std::invalid_argument("decode_offsets: prior must have positive extent");
  }
  const double cx = offsets[0] * variances.center * prior.width() + prior.center_x();
  const double cy = offsets[1] * variances.center * prior.height() + prior.center_y();
  const double w = std::exp(offsets[2] * variances.size) * prior.width();
  const double h = std::exp(offsets[3] * variances.size) * prior.height();
  return BoundingBox::from_center(cx, cy, w, h);
}

LossBreakdown evaluate_loss(const std::vector<BoundingBox>& priors, const MatchResult& match,
                            const std::vector<PredictionRow>& rows,
                            const std::vector<BoundingBox>& gt_boxes,
                            const std::vector<State>& gt_states, const LossConfig& config) {
  check_sizes(priors.size(), rows.size(), match.priors.size(), gt_boxes.size(),
              gt_states.size());

  LossBreakdown out;
  std::vector<std::size_t> unmatched;
  std::vector<double> background_loss(priors.size(), 0.0);

  for (std::size_t p = 0; p < priors.size(); ++p) {
    const std::array<double, 2> logits{rows[p].background, rows[p].foreground};
    const std::int64_t g = match.priors[p].gt;
    if (g < 0) {
      unmatched.push_back(p);
      background_loss[p] = softmax_cross_entropy(logits, 0);
      continue;
    }
    ++out.matched;
    out.conf += softmax_cross_entropy(logits, 1);

    const auto target = encode_offsets(priors[p], gt_boxes[static_cast<std::size_t>(g)],
                                       config.variances);
    for (std::size_t i = 0; i < 4; ++i) out.loc += smooth_l1(rows[p].loc[i] - target[i]);

    const auto want = static_cast<std::size_t>(gt_states[static_cast<std::size_t>(g)]);
    for (std::size_t s = 0; s < kStateCount; ++s) {
      out.state += sigmoid_cross_entropy(rows[p].state[s], s == want ? 1.0 : 0.0);
    }
  }

  for (std::size_t p : select_negatives(background_loss,
                                        unmatched,
                                        static_cast<std::size_t>(out.matched), config)) {
    out.conf += background_loss[p];
  }
  finalize(out, config);
  return out;
}

LossBreakdown evaluate_multiclass_loss(const std::vector<BoundingBox>& priors,
                                       const MatchResult& match,
                                       const std::vector<MulticlassRow>& rows,
                                       const std::vector<BoundingBox>& gt_boxes,
                                       const std::vector<State>& gt_states,
                                       const LossConfig& config) {
  check_sizes(priors.size(), rows.size(), match.priors.size(), gt_boxes.size(),
              gt_states.size());

  LossBreakdown out;
  std::vector<std::size_t> unmatched;
  std::vector<double> background_loss(priors.size(), 0.0);

  for (std::size_t p = 0; p < priors.size(); ++p) {
    const std::int64_t g = match.priors[p].gt;
    if (g < 0) {
      unmatched.push_back(p);
      background_loss[p] = softmax_cross_entropy(rows[p].classes, 0);
      continue;
    }
    ++out.matched;
    const auto want = 1 + static_cast<std::size_t>(gt_states[static_cast<std::size_t>(g)]);
    out.conf += softmax_cross_entropy(rows[p].classes, want);

    const auto target = encode_offsets(priors[p], gt_boxes[static_cast<std::size_t>(g)],
                                       config.variances);
    for (std::size_t i = 0; i < 4; ++i) out.loc += smooth_l1(rows[p].loc[i] - target[i]);
  }

  for (std::size_t p : select_negatives(background_loss,
                                        unmatched,
                                        static_cast<std::size_t>(out.matched), config)) {
    out.conf += background_loss[p];
  }
  finalize(out, config);
  return out;
}

}  // namespace anchorkit
