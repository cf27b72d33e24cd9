#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <anchorkit/geometry.hpp>
#include <anchorkit/matching.hpp>
#include <anchorkit/state.hpp>

namespace anchorkit {

/// One prediction row per generated prior, in prior order. Scores are raw
/// logits; `loc` holds the four encoded box offsets.
struct PredictionRow {
  double background = 0.0;
  double foreground = 0.0;
  std::array<double, 4> loc{};
  std::array<double, kStateCount> state{};  // off, red, yellow, green
};

/// Alternative formulation folding the states into the class head:
/// background plus one class per state, no separate state branch.
struct MulticlassRow {
  std::array<double, 1 + kStateCount> classes{};  // background, off, red, yellow, green
  std::array<double, 4> loc{};
};

struct BoxVariances {
  double center = 0.1;
  double size = 0.2;
};

/// Offsets of `gt` relative to `prior`: center deltas in prior-size units
/// and log size ratios, each divided by its variance. Requires positive
/// prior and ground-truth extents.
std::array<double, 4> encode_offsets(const BoundingBox& prior, const BoundingBox& gt,
                                     const BoxVariances& variances = {});

/// Exact inverse of encode_offsets.
BoundingBox decode_offsets(const BoundingBox& prior, const std::array<double, 4>& offsets,
                           const BoxVariances& variances = {});

enum class NegativesPolicy {
  hard_negative_mining,  // highest-background-loss negatives, ratio : 1 per positive
  all_negatives,
};

struct LossConfig {
  double alpha = 1.0;
  double beta = 1.0;
  BoxVariances variances{};
  NegativesPolicy negatives = NegativesPolicy::hard_negative_mining;
  double negative_ratio = 3.0;
};

/// Component sums plus the normalized total
/// (conf + alpha * loc + beta * state) / matched, defined as 0 when no
/// prior matched.
struct LossBreakdown {
  double conf = 0.0;
  double loc = 0.0;
  double state = 0.0;
  std::int64_t matched = 0;
  double alpha = 1.0;
  double beta = 1.0;
  double total = 0.0;
};

/// Evaluates the training objective on given predictions. Confidence is a
/// two-class softmax cross-entropy over matched priors plus negatives
/// chosen by the policy; localization is smooth-L1 against encoded
/// offsets on matched priors; state is per-class sigmoid cross-entropy
/// against the one-hot ground-truth state on matched priors. Throws
/// std::invalid_argument on row/prior count mismatch.
LossBreakdown evaluate_loss(const std::vector<BoundingBox>& priors, const MatchResult& match,
                            const std::vector<PredictionRow>& rows,
                            const std::vector<BoundingBox>& gt_boxes,
                            const std::vector<State>& gt_states, const LossConfig& config = {});

/// Same objective under the folded multiclass formulation: one softmax
/// cross-entropy over background plus the four states, no state term.
LossBreakdown evaluate_multiclass_loss(const std::vector<BoundingBox>& priors,
                                       const MatchResult& match,
                                       const std::vector<MulticlassRow>& rows,
                                       const std::vector<BoundingBox>& gt_boxes,
                                       const std::vector<State>& gt_states,
                                       const LossConfig& config = {});

}  // namespace anchorkit
