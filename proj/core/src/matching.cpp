#include <anchorkit/matching.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace anchorkit {

namespace {

struct Candidate {
  double iou;
  std::size_t prior;
  std::size_t gt;
};

}  // namespace

std::size_t MatchResult::matched_count() const {
  std::size_t n = 0;
  for (const PriorMatch& p : priors) {
    if (p.gt >= 0) ++n;
  }
  return n;
}

MatchResult match(const std::vector<BoundingBox>& priors, const std::vector<BoundingBox>& gts,
                  double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("match: threshold must lie in (0, 1)");
  }

  MatchResult result;
  result.threshold = threshold;
  result.priors.resize(priors.size());
  result.gts.resize(gts.size());

  std::vector<Candidate> positive;
  for (std::size_t p = 0; p < priors.size(); ++p) {
    double best = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double overlap = iou(priors[p], gts[g]);
      if (overlap <= 0.0) continue;
      positive.push_back({overlap, p, g});
      best = std::max(best, overlap);
      GtMatch& gm = result.gts[g];
      if (overlap > gm.best_iou) {  // ties keep the earlier prior
        gm.best_iou = overlap;
        gm.best_prior = static_cast<std::int64_t>(p);
      }
    }
    result.priors[p].iou = best;
  }
  for (GtMatch& gm : result.gts) gm.covered = gm.best_iou >= threshold;

  // Phase 1: sorted single pass over positive pairs is the greedy global
  // argmax, since once a pair is reachable both endpoints are still free
  // exactly when no better pair used them.
  std::sort(positive.begin(), positive.end(), [](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.prior != b.prior) return a.prior < b.prior;
    return a.gt < b.gt;
  });
  std::vector<bool> gt_taken(gts.size(), false);
  for (const Candidate& c : positive) {
    if (gt_taken[c.gt] || result.priors[c.prior].gt >= 0) continue;
    result.priors[c.prior].gt = static_cast<std::int64_t>(c.gt);
    result.priors[c.prior].iou = c.iou;
    gt_taken[c.gt] = true;
  }

  // Phase 2: leftover priors take their best ground truth when it clears
  // the threshold, regardless of whether that ground truth is taken.
  for (std::size_t p = 0; p < priors.size(); ++p) {
    if (result.priors[p].gt >= 0) continue;
    double best = 0.0;
    std::int64_t best_gt = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double overlap = iou(priors[p], gts[g]);
      if (overlap > best) {
        best = overlap;
        best_gt = static_cast<std::int64_t>(g);
      }
    }
    if (best_gt >= 0 && best >= threshold) {
      result.priors[p].gt = best_gt;
      result.priors[p].iou = best;
    }
  }
  return result;
}

MatchResult match(const PriorBoxSet& priors, const std::vector<BoundingBox>& gts,
                  double threshold) {
  return match(priors.boxes, gts, threshold);
}

std::int64_t CoverageHistogram::total() const {
  std::int64_t n = 0;
  for (const CoverageBin& b : bins) n += b.covered + b.uncovered;
  return n;
}

std::int64_t CoverageHistogram::covered_total() const {
  std::int64_t n = 0;
  for (const CoverageBin& b : bins) n += b.covered;
  return n;
}

CoverageHistogram coverage_histogram(const std::vector<double>& best_ious,
                                     const std::vector<BoundingBox>& gts, double threshold,
                                     double bin_width) {
  if (best_ious.size() != gts.size()) {
    throw std::invalid_argument("coverage_histogram: one best IoU per ground truth required");
  }
  if (!(bin_width >= 1.0)) {
    throw std::invalid_argument("coverage_histogram: bin_width must be at least 1");
  }

  CoverageHistogram hist;
  hist.bin_width = bin_width;
  if (gts.empty()) return hist;

  std::size_t lo = std::numeric_limits<std::size_t>::max();
  std::size_t hi = 0;
  std::vector<std::pair<std::size_t, bool>> entries;  // (bin index, covered)
  entries.reserve(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const auto bin = static_cast<std::size_t>(std::floor(gts[g].width() / bin_width));
    entries.emplace_back(bin, best_ious[g] >= threshold);
    lo = std::min(lo, bin);
    hi = std::max(hi, bin);
  }
  hist.bins.resize(hi - lo + 1);
  for (std::size_t i = 0; i < hist.bins.size(); ++i) {
    hist.bins[i].width_lo = static_cast<double>(lo + i) * bin_width;
    hist.bins[i].width_hi = static_cast<double>(lo + i + 1) * bin_width;
  }
  for (const auto& [bin, covered] : entries) {
    if (covered) {
      ++hist.bins[bin - lo].covered;
    } else {
      ++hist.bins[bin - lo].uncovered;
    }
  }
  return hist;
}

CoverageHistogram coverage_histogram(const MatchResult& match,
                                     const std::vector<BoundingBox>& gts, double bin_width) {
  std::vector<double> best;
  best.reserve(match.gts.size());
  for (const GtMatch& gm : match.gts) best.push_back(gm.best_iou);
  return coverage_histogram(best, gts, match.threshold, bin_width);
}

}  // namespace anchorkit
