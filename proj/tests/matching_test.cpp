#include "anchorkit/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "anchorkit/geometry.hpp"
#include "anchorkit/priors.hpp"
#include "anchorkit/synth.hpp"
#include "support/helpers.hpp"

namespace anchorkit {
namespace {

/// Reference matcher: phase 1 by repeated global argmax over free pairs,
/// phase 2 per leftover prior. Shares only iou() with the unit under test.
MatchResult oracle_match(const std::vector<BoundingBox>& priors,
                         const std::vector<BoundingBox>& gts, double threshold) {
  MatchResult result;
  result.threshold = threshold;
  result.priors.resize(priors.size());
  result.gts.resize(gts.size());

  std::vector<std::vector<double>> overlap(priors.size(), std::vector<double>(gts.size(), 0.0));
  for (std::size_t p = 0; p < priors.size(); ++p) {
    for (std::size_t g = 0; g < gts.size(); ++g) overlap[p][g] = iou(priors[p], gts[g]);
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (std::size_t p = 0; p < priors.size(); ++p) {
      if (overlap[p][g] > result.gts[g].best_iou) {
        result.gts[g].best_iou = overlap[p][g];
        result.gts[g].best_prior = static_cast<std::int64_t>(p);
      }
    }
    result.gts[g].covered = result.gts[g].best_iou >= threshold;
  }
  for (std::size_t p = 0; p < priors.size(); ++p) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      result.priors[p].iou = std::max(result.priors[p].iou, overlap[p][g]);
    }
  }

  std::vector<bool> prior_used(priors.size(), false);
  std::vector<bool> gt_used(gts.size(), false);
  while (true) {
    double best = 0.0;
    std::size_t best_p = 0;
    std::size_t best_g = 0;
    bool found = false;
    for (std::size_t p = 0; p < priors.size(); ++p) {
      if (prior_used[p]) continue;
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (gt_used[g]) continue;
        if (overlap[p][g] > best) {
          best = overlap[p][g];
          best_p = p;
          best_g = g;
          found = true;
        }
      }
    }
    if (!found) break;
    prior_used[best_p] = true;
    gt_used[best_g] = true;
    result.priors[best_p].gt = static_cast<std::int64_t>(best_g);
    result.priors[best_p].iou = best;
  }

  for (std::size_t p = 0; p < priors.size(); ++p) {
    if (prior_used[p]) continue;
    double best = 0.0;
    std::int64_t best_g = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (overlap[p][g] > best) {
        best = overlap[p][g];
        best_g = static_cast<std::int64_t>(g);
      }
    }
    if (best_g >= 0 && best >= threshold) {
      result.priors[p].gt = best_g;
      result.priors[p].iou = best;
    }
  }
  return result;
}

void expect_same(const MatchResult& got, const MatchResult& want) {
  ASSERT_EQ(got.priors.size(), want.priors.size());
  ASSERT_EQ(got.gts.size(), want.gts.size());
  for (std::size_t p = 0; p < got.priors.size(); ++p) {
    EXPECT_EQ(got.priors[p].gt, want.priors[p].gt) << "prior " << p;
    EXPECT_EQ(got.priors[p].iou, want.priors[p].iou) << "prior " << p;
  }
  for (std::size_t g = 0; g < got.gts.size(); ++g) {
    EXPECT_EQ(got.gts[g].best_prior, want.gts[g].best_prior) << "gt " << g;
    EXPECT_EQ(got.gts[g].best_iou, want.gts[g].best_iou) << "gt " << g;
    EXPECT_EQ(got.gts[g].covered, want.gts[g].covered) << "gt " << g;
  }
}

TEST(MatchTest, IdenticalBoxIsCovered) {
  const BoundingBox box = BoundingBox::from_xywh(10, 10, 5, 5);
  const MatchResult result = match(std::vector<BoundingBox>{box}, {box}, 0.3);
  ASSERT_EQ(result.gts.size(), 1u);
  EXPECT_TRUE(result.gts[0].covered);
  EXPECT_DOUBLE_EQ(result.gts[0].best_iou, 1.0);
  EXPECT_EQ(result.gts[0].best_prior, 0);
  EXPECT_EQ(result.priors[0].gt, 0);
  EXPECT_DOUBLE_EQ(result.priors[0].iou, 1.0);
  EXPECT_EQ(result.matched_count(), 1u);
}

TEST(MatchTest, CoarseStrideMissesWorstCaseSmallObject) {
  PriorLayout layout;
  layout.layer_name = "coarse";
  layout.feature_h = 4;
  layout.feature_w = 4;
  layout.cumulative_stride = 16;
  layout.widths = {5};
  layout.aspect_ratio = 1.0;
  layout.offsets_x = {0.5};
  layout.offsets_y = {0.5};
  const PriorBoxSet priors = generate(layout, 64, 64);

  // Midway between cell centers: a 5 px box cannot reach IoU 0.5 when the
  // pitch is 16 px.
  const BoundingBox worst = BoundingBox::from_center(16, 8, 5, 5);
  const MatchResult result = match(priors, {worst}, 0.5);
  EXPECT_FALSE(result.gts[0].covered);

  const BoundingBox aligned = BoundingBox::from_center(8, 8, 5, 5);
  EXPECT_TRUE(match(priors, {aligned}, 0.5).gts[0].covered);
}

TEST(MatchTest, Phase1AssignsEvenBelowThreshold) {
  const BoundingBox gt = BoundingBox::from_xywh(0, 0, 10, 10);
  const BoundingBox prior = BoundingBox::from_xywh(8, 0, 10, 10);  // IoU 1/9
  const MatchResult result = match(std::vector<BoundingBox>{prior}, {gt}, 0.5);
  EXPECT_EQ(result.priors[0].gt, 0);
  EXPECT_NEAR(result.priors[0].iou, 1.0 / 9.0, 1e-12);
  EXPECT_FALSE(result.gts[0].covered);
  EXPECT_EQ(result.gts[0].best_prior, 0);
}

TEST(MatchTest, Phase2AssignsLeftoverPriorsAboveThreshold) {
  const BoundingBox gt = BoundingBox::from_xywh(0, 0, 10, 10);
  const std::vector<BoundingBox> priors = {
      BoundingBox::from_xywh(0, 0, 10, 10),
      BoundingBox::from_xywh(2, 0, 10, 10),  // IoU 2/3
      BoundingBox::from_xywh(9, 9, 10, 10),  // IoU 1/199, below threshold
  };
  const MatchResult result = match(priors, {gt}, 0.3);
  EXPECT_EQ(result.priors[0].gt, 0);
  EXPECT_EQ(result.priors[1].gt, 0);
  EXPECT_EQ(result.priors[2].gt, -1);
  EXPECT_GT(result.priors[2].iou, 0.0);
  EXPECT_EQ(result.matched_count(), 2u);
}

TEST(MatchTest, TiesPreferLowerIndices) {
  const BoundingBox box = BoundingBox::from_xywh(0, 0, 10, 10);
  const MatchResult two_priors = match(std::vector<BoundingBox>{box, box}, {box}, 0.5);
  EXPECT_EQ(two_priors.gts[0].best_prior, 0);
  EXPECT_EQ(two_priors.priors[0].gt, 0);
  EXPECT_EQ(two_priors.priors[1].gt, 0);  // phase 2, same ground truth

  const MatchResult two_gts = match(std::vector<BoundingBox>{box}, {box, box}, 0.5);
  EXPECT_EQ(two_gts.priors[0].gt, 0);
  EXPECT_TRUE(two_gts.gts[0].covered);
  EXPECT_TRUE(two_gts.gts[1].covered);  // covered tracks best_iou, not assignment
  EXPECT_EQ(two_gts.gts[1].best_prior, 0);
}

TEST(MatchTest, EmptyInputs) {
  const BoundingBox box = BoundingBox::from_xywh(0, 0, 10, 10);
  const MatchResult no_priors = match(std::vector<BoundingBox>{}, {box}, 0.3);
  ASSERT_EQ(no_priors.gts.size(), 1u);
  EXPECT_FALSE(no_priors.gts[0].covered);
  EXPECT_EQ(no_priors.gts[0].best_prior, -1);

  const MatchResult no_gts = match(std::vector<BoundingBox>{box}, {}, 0.3);
  EXPECT_EQ(no_gts.priors[0].gt, -1);
  EXPECT_DOUBLE_EQ(no_gts.priors[0].iou, 0.0);
  EXPECT_EQ(no_gts.matched_count(), 0u);
}

TEST(MatchTest, ThresholdMustLieInOpenUnitInterval) {
  const std::vector<BoundingBox> boxes = {BoundingBox::from_xywh(0, 0, 1, 1)};
  EXPECT_THROW(match(boxes, boxes, 0.0), std::invalid_argument);
  EXPECT_THROW(match(boxes, boxes, 1.0), std::invalid_argument);
  EXPECT_THROW(match(boxes, boxes, -0.5), std::invalid_argument);
  EXPECT_THROW(match(boxes, boxes, std::numeric_limits<double>::quiet_NaN()),
               std::invalid_argument);
  EXPECT_NO_THROW(match(boxes, boxes, 0.999));
}

TEST(MatchPropertyTest, AgreesWithExhaustiveOracle) {
  SplitMix64 rng(401);
  for (int iter = 0; iter < 500; ++iter) {
    const std::size_t n_priors = 1 + rng.next() % 50;
    const std::size_t n_gts = 1 + rng.next() % 10;
    std::vector<BoundingBox> priors;
    std::vector<BoundingBox> gts;
    for (std::size_t i = 0; i < n_priors; ++i) priors.push_back(test::random_box(rng, 60));
    for (std::size_t i = 0; i < n_gts; ++i) gts.push_back(test::random_box(rng, 60));
    if (iter % 7 == 0) {
      priors.push_back(BoundingBox::from_xywh(rng.uniform(0.0, 60.0), 5, 0, 10));
      gts.push_back(priors.back());  // zero-area pair overlaps nothing
    }
    if (iter % 5 == 0 && !gts.empty()) priors.push_back(gts[0]);  // force an exact pair
    const double threshold = rng.uniform(0.05, 0.95);
    expect_same(match(priors, gts, threshold), oracle_match(priors, gts, threshold));
  }
}

TEST(MatchPropertyTest, DeterministicIncludingTieBreaks) {
  SplitMix64 rng(402);
  for (int iter = 0; iter < 150; ++iter) {
    const std::size_t n = 2 + rng.next() % 10;
    std::vector<BoundingBox> priors;
    std::vector<BoundingBox> gts;
    for (std::size_t i = 0; i < n; ++i) {
      const BoundingBox box = test::random_box(rng, 40);
      priors.push_back(box);
      priors.push_back(box);  // duplicates force IoU ties
      if (i % 2 == 0) gts.push_back(box);
    }
    gts.push_back(gts.front());
    const double threshold = rng.uniform(0.1, 0.9);
    const MatchResult a = match(priors, gts, threshold);
    const MatchResult b = match(priors, gts, threshold);
    expect_same(a, b);
    expect_same(a, oracle_match(priors, gts, threshold));
  }
}

TEST(MatchPropertyTest, LoweringThresholdNeverUncovers) {
  SplitMix64 rng(403);
  for (int iter = 0; iter < 150; ++iter) {
    const std::size_t n_priors = 1 + rng.next() % 30;
    const std::size_t n_gts = 1 + rng.next() % 8;
    std::vector<BoundingBox> priors;
    std::vector<BoundingBox> gts;
    for (std::size_t i = 0; i < n_priors; ++i) priors.push_back(test::random_box(rng, 50));
    for (std::size_t i = 0; i < n_gts; ++i) gts.push_back(test::random_box(rng, 50));
    double lo = rng.uniform(0.05, 0.9);
    double hi = rng.uniform(0.05, 0.9);
    if (lo > hi) std::swap(lo, hi);
    const MatchResult loose = match(priors, gts, lo);
    const MatchResult strict = match(priors, gts, hi);
    for (std::size_t g = 0; g < n_gts; ++g) {
      if (strict.gts[g].covered) EXPECT_TRUE(loose.gts[g].covered);
    }
    EXPECT_GE(loose.matched_count(), strict.matched_count());
  }
}

TEST(MatchPropertyTest, AddingOffsetsNeverLowersBestIou) {
  SplitMix64 rng(404);
  for (int iter = 0; iter < 100; ++iter) {
    PriorLayout sparse;
    sparse.layer_name = "sparse";
    sparse.feature_h = 4;
    sparse.feature_w = 4;
    sparse.cumulative_stride = 16;
    sparse.widths = {rng.uniform(3.0, 20.0)};
    sparse.aspect_ratio = rng.uniform(0.3, 3.0);
    sparse.offsets_x = {0.5};
    sparse.offsets_y = {0.5};
    PriorLayout dense = sparse;
    dense.offsets_x = {0.25, 0.5, 0.75};
    dense.offsets_y = {0.1, 0.5, 0.9};

    std::vector<BoundingBox> gts;
    const std::size_t n_gts = 1 + rng.next() % 6;
    for (std::size_t i = 0; i < n_gts; ++i) gts.push_back(test::random_box(rng, 64));
    const MatchResult before = match(generate(sparse, 64, 64), gts, 0.3);
    const MatchResult after = match(generate(dense, 64, 64), gts, 0.3);
    for (std::size_t g = 0; g < n_gts; ++g) {
      EXPECT_GE(after.gts[g].best_iou, before.gts[g].best_iou - 1e-12);
    }
  }
}

TEST(MatchPropertyTest, PositiveOverlapAlwaysRecordsBestPrior) {
  SplitMix64 rng(405);
  for (int iter = 0; iter < 150; ++iter) {
    const std::size_t n_priors = 1 + rng.next() % 20;
    const std::size_t n_gts = 1 + rng.next() % 10;
    std::vector<BoundingBox> priors;
    std::vector<BoundingBox> gts;
    for (std::size_t i = 0; i < n_priors; ++i) priors.push_back(test::random_box(rng, 40));
    for (std::size_t i = 0; i < n_gts; ++i) gts.push_back(test::random_box(rng, 40));
    const MatchResult result = match(priors, gts, 0.9);  // high bar: phase 2 rarely fires
    for (std::size_t g = 0; g < n_gts; ++g) {
      double best = 0.0;
      for (const BoundingBox& prior : priors) best = std::max(best, iou(prior, gts[g]));
      if (best > 0.0) {
        EXPECT_GE(result.gts[g].best_prior, 0);
        EXPECT_EQ(result.gts[g].best_iou, best);
      } else {
        EXPECT_EQ(result.gts[g].best_prior, -1);
      }
    }
  }
}

TEST(CoverageHistogramTest, AllCoveredLeavesUncoveredZero) {
  const BoundingBox box = BoundingBox::from_xywh(0, 0, 7, 7);
  const MatchResult result =
      match(std::vector<BoundingBox>{box}, {box, box}, 0.5);
  const CoverageHistogram hist = coverage_histogram(result, {box, box}, 1.0);
  ASSERT_EQ(hist.bins.size(), 1u);
  EXPECT_DOUBLE_EQ(hist.bins[0].width_lo, 7.0);
  EXPECT_DOUBLE_EQ(hist.bins[0].width_hi, 8.0);
  EXPECT_EQ(hist.bins[0].covered, 2);
  EXPECT_EQ(hist.bins[0].uncovered, 0);
}

TEST(CoverageHistogramTest, BinsPartitionWidthRange) {
  const std::vector<BoundingBox> gts = {
      BoundingBox::from_xywh(0, 0, 3.5, 1),
      BoundingBox::from_xywh(0, 0, 4.2, 1),
      BoundingBox::from_xywh(0, 0, 9.9, 1),
  };
  const std::vector<double> best = {0.6, 0.1, 0.6};
  const CoverageHistogram hist = coverage_histogram(best, gts, 0.5, 1.0);
  ASSERT_EQ(hist.bins.size(), 7u);  // [3,4) .. [9,10), trimmed outside
  EXPECT_DOUBLE_EQ(hist.bins.front().width_lo, 3.0);
  EXPECT_DOUBLE_EQ(hist.bins.back().width_hi, 10.0);
  EXPECT_EQ(hist.bins[0].covered, 1);
  EXPECT_EQ(hist.bins[1].uncovered, 1);
  EXPECT_EQ(hist.bins[6].covered, 1);
  EXPECT_EQ(hist.bins[2].covered + hist.bins[2].uncovered, 0);
  EXPECT_EQ(hist.total(), 3);
  EXPECT_EQ(hist.covered_total(), 2);
}

TEST(CoverageHistogramTest, RejectsBadArguments) {
  const std::vector<BoundingBox> gts = {BoundingBox::from_xywh(0, 0, 5, 5)};
  EXPECT_THROW(coverage_histogram({0.5, 0.5}, gts, 0.3, 1.0), std::invalid_argument);
  EXPECT_THROW(coverage_histogram({0.5}, gts, 0.3, 0.5), std::invalid_argument);
  EXPECT_NO_THROW(coverage_histogram({0.5}, gts, 0.3, 1.0));
}

TEST(CoverageHistogramPropertyTest, TotalsConserveGroundTruths) {
  SplitMix64 rng(406);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t n = 1 + rng.next() % 40;
    std::vector<BoundingBox> gts;
    std::vector<double> best;
    std::size_t covered = 0;
    const double threshold = rng.uniform(0.1, 0.9);
    for (std::size_t i = 0; i < n; ++i) {
      gts.push_back(test::random_box(rng, 80, 0.5, 40));
      best.push_back(rng.uniform(0.0, 1.0));
      if (best.back() >= threshold) ++covered;
    }
    const double bin_width = rng.uniform(1.0, 5.0);
    const CoverageHistogram hist = coverage_histogram(best, gts, threshold, bin_width);
    EXPECT_EQ(hist.total(), static_cast<std::int64_t>(n));
    EXPECT_EQ(hist.covered_total(), static_cast<std::int64_t>(covered));
    ASSERT_FALSE(hist.bins.empty());
    EXPECT_GT(hist.bins.front().covered + hist.bins.front().uncovered, 0);
    EXPECT_GT(hist.bins.back().covered + hist.bins.back().uncovered, 0);
    for (const CoverageBin& bin : hist.bins) {
      EXPECT_NEAR(bin.width_hi - bin.width_lo, bin_width, 1e-12);
    }
  }
}

}  // namespace
}  // namespace anchorkit
