#pragma once

#include <cstdint>
#include <vector>

#include <anchorkit/geometry.hpp>
#include <anchorkit/priors.hpp>

namespace anchorkit {

/// Assignment of one prior. `gt` is -1 while unmatched; `iou` is the
/// overlap with the assigned ground truth, or the best overlap seen when
/// unmatched.
struct PriorMatch {
  std::int64_t gt = -1;
  double iou = 0.0;
};

/// Best prior for one ground truth, over all priors and regardless of the
/// assignment phase. `covered` means best_iou reached the threshold.
struct GtMatch {
  std::int64_t best_prior = -1;
  double best_iou = 0.0;
  bool covered = false;
};

struct MatchResult {
  std::vector<PriorMatch> priors;
  std::vector<GtMatch> gts;
  double threshold = 0.0;

  std::size_t matched_count() const;
};

/// Two-phase SSD matching. Phase 1 greedily pairs ground truths with their
/// best priors: positive-IoU (prior, gt) pairs are visited by descending
/// IoU (ties: lower prior index, then lower gt index) and taken when both
/// sides are still free. Phase 2 assigns every remaining prior with
/// IoU >= threshold to its best ground truth. Empty priors yield all
/// ground truths uncovered. Requires threshold in (0, 1).
MatchResult match(const std::vector<BoundingBox>& priors, const std::vector<BoundingBox>& gts,
                  double threshold);
MatchResult match(const PriorBoxSet& priors, const std::vector<BoundingBox>& gts,
                  double threshold);

struct CoverageBin {
  double width_lo = 0.0;
  double width_hi = 0.0;
  std::int64_t covered = 0;
  std::int64_t uncovered = 0;
};

/// Covered/uncovered counts keyed by ground-truth width. Bins partition
/// [0, max width) into bin_width slices; empty leading/trailing bins are
/// trimmed. Bin totals sum to the number of ground truths.
struct CoverageHistogram {
  double bin_width = 0.0;
  std::vector<CoverageBin> bins;

  std::int64_t total() const;
  std::int64_t covered_total() const;
};

CoverageHistogram coverage_histogram(const MatchResult& match,
                                     const std::vector<BoundingBox>& gts, double bin_width);

/// Same histogram computed from per-gt best IoUs (e.g. from
/// best_prior_iou) without materializing priors.
CoverageHistogram coverage_histogram(const std::vector<double>& best_ious,
                                     const std::vector<BoundingBox>& gts, double threshold,
                                     double bin_width);

}  // namespace anchorkit
