#include "anchorkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "anchorkit/error.hpp"
#include "anchorkit/geometry.hpp"
#include "anchorkit/records.hpp"
#include "anchorkit/synth.hpp"
#include "support/helpers.hpp"

namespace anchorkit {
namespace {

GroundTruthRecord make_gt(std::string image_id, const BoundingBox& box,
                          State state = State::red,
                          std::vector<std::string> tags = {"front", "vehicle"},
                          std::string track_id = {}) {
  GroundTruthRecord record;
  record.image_id = std::move(image_id);
  record.box = box;
  record.state = state;
  record.tags = std::move(tags);
  record.track_id = std::move(track_id);
  return record;
}

PredictionRecord make_det(std::string image_id, const BoundingBox& box, double confidence,
                          State state = State::red) {
  PredictionRecord record;
  record.image_id = std::move(image_id);
  record.box = box;
  record.confidence = confidence;
  record.state = state;
  return record;
}

TEST(DontCareTest, DefaultTagRule) {
  EvalConfig config;
  const BoundingBox box = BoundingBox::from_xywh(0, 0, 10, 10);
  EXPECT_FALSE(is_dont_care(make_gt("i", box), config));
  EXPECT_TRUE(is_dont_care(make_gt("i", box, State::red, {"left", "vehicle"}), config));
  EXPECT_TRUE(is_dont_care(make_gt("i", box, State::red, {"front", "pedestrian"}), config));
  EXPECT_TRUE(is_dont_care(make_gt("i", box, State::red, {"front", "tram"}), config));
  EXPECT_TRUE(is_dont_care(make_gt("i", box, State::red, {"front", "bus"}), config));
  EXPECT_TRUE(is_dont_care(make_gt("i", box, State::red, {"front", "cyclist"}), config));
  EXPECT_TRUE(is_dont_care(make_gt("i", box, State::red, {}), config));
  EXPECT_FALSE(is_dont_care(make_gt("i", box, State::red, {"front"}), config));
}

TEST(DontCareTest, MinWidthAndStateFilter) {
  EvalConfig config;
  config.min_width = 5.0;
  EXPECT_TRUE(is_dont_care(make_gt("i", BoundingBox::from_xywh(0, 0, 4.9, 20)), config));
  EXPECT_FALSE(is_dont_care(make_gt("i", BoundingBox::from_xywh(0, 0, 5.0, 20)), config));

  config.min_width = 0.0;
  config.state_filter = State::red;
  EXPECT_FALSE(is_dont_care(make_gt("i", BoundingBox::from_xywh(0, 0, 10, 10)), config));
  EXPECT_TRUE(is_dont_care(
      make_gt("i", BoundingBox::from_xywh(0, 0, 10, 10), State::green), config));
}

TEST(DontCareTest, CustomRuleOverridesTags) {
  EvalConfig config;
  config.dc_rules = [](const GroundTruthRecord& record) { return record.city == "skip"; };
  GroundTruthRecord record = make_gt("i", BoundingBox::from_xywh(0, 0, 10, 10), State::red, {});
  EXPECT_FALSE(is_dont_care(record, config));  // untagged, but the override accepts it
  record.city = "skip";
  EXPECT_TRUE(is_dont_care(record, config));
}

TEST(ScoreImageTest, PerfectDetectionIsTruePositive) {
  const BoundingBox box = BoundingBox::from_xywh(10, 10, 8, 20);
  const ImageScore score =
      score_image({make_gt("i", box)}, {make_det("i", box, 0.9)}, EvalConfig{});
  EXPECT_EQ(score.tp, 1);
  EXPECT_EQ(score.fp, 0);
  EXPECT_EQ(score.fn, 0);
  EXPECT_TRUE(score.gt_hit[0]);
  EXPECT_DOUBLE_EQ(score.gt_claim_confidence[0], 0.9);
  EXPECT_EQ(score.detections[0], Disposition::tp);
}

TEST(ScoreImageTest, DoubleDetectionCountsFalsePositive) {
  const BoundingBox box = BoundingBox::from_xywh(0, 0, 10, 10);
  const ImageScore score = score_image(
      {make_gt("i", box)},
      {make_det("i", box, 0.7), make_det("i", BoundingBox::from_xywh(1, 0, 10, 10), 0.9)},
      EvalConfig{});
  EXPECT_EQ(score.tp, 1);
  EXPECT_EQ(score.fp, 1);
  // The higher-confidence detection claims first despite poorer overlap.
  EXPECT_EQ(score.detections[1], Disposition::tp);
  EXPECT_EQ(score.detections[0], Disposition::fp);
  EXPECT_DOUBLE_EQ(score.gt_claim_confidence[0], 0.9);
}

TEST(ScoreImageTest, DetectionOnDontCareIsIgnored) {
  const BoundingBox box = BoundingBox::from_xywh(0, 0, 10, 10);
  const ImageScore score =
      score_image({make_gt("i", box, State::red, {"front", "pedestrian"})},
                  {make_det("i", box, 0.9)}, EvalConfig{});
  EXPECT_EQ(score.tp, 0);
  EXPECT_EQ(score.fp, 0);
  EXPECT_EQ(score.fn, 0);
  EXPECT_TRUE(score.gt_dont_care[0]);
  EXPECT_EQ(score.detections[0], Disposition::ignored);
}

TEST(ScoreImageTest, ClaimsLargestOverlapAboveThreshold) {
  const BoundingBox near = BoundingBox::from_xywh(0, 0, 10, 10);
  const BoundingBox far = BoundingBox::from_xywh(6, 0, 10, 10);
  const BoundingBox det_box = BoundingBox::from_xywh(1, 0, 10, 10);
  const ImageScore score = score_image({make_gt("i", far), make_gt("i", near)},
                                       {make_det("i", det_box, 0.8)}, EvalConfig{});
  EXPECT_EQ(score.tp, 1);
  EXPECT_EQ(score.fn, 1);
  EXPECT_TRUE(score.gt_hit[1]);
  EXPECT_FALSE(score.gt_hit[0]);
}

TEST(ScoreImageTest, ConfidenceTiesFollowInputOrder) {
  const BoundingBox box = BoundingBox::from_xywh(0, 0, 10, 10);
  const ImageScore score = score_image(
      {make_gt("i", box)}, {make_det("i", box, 0.5), make_det("i", box, 0.5)}, EvalConfig{});
  EXPECT_EQ(score.detections[0], Disposition::tp);
  EXPECT_EQ(score.detections[1], Disposition::fp);
}

TEST(ScoreImageTest, StateFilterDropsForeignDetections) {
  EvalConfig config;
  config.state_filter = State::red;
  const BoundingBox box = BoundingBox::from_xywh(0, 0, 10, 10);
  const BoundingBox other = BoundingBox::from_xywh(50, 50, 10, 10);
  const ImageScore score = score_image(
      {make_gt("i", box, State::red), make_gt("i", other, State::green)},
      {make_det("i", box, 0.9, State::green), make_det("i", box, 0.8, State::red),
       make_det("i", other, 0.7, State::green)},
      config);
  EXPECT_EQ(score.detections[0], Disposition::dropped);
  EXPECT_EQ(score.detections[1], Disposition::tp);
  EXPECT_EQ(score.detections[2], Disposition::dropped);
  EXPECT_TRUE(score.gt_dont_care[1]);  // green ground truth under a red filter
  EXPECT_EQ(score.tp, 1);
  EXPECT_EQ(score.fp, 0);
  EXPECT_EQ(score.fn, 0);
}

TEST(ScoreImagePropertyTest, ConservationHoldsOnRandomScenes) {
  SplitMix64 rng(801);
  const std::vector<std::vector<std::string>> tag_pool = {
      {"front", "vehicle"}, {"left", "vehicle"}, {"front", "pedestrian"}, {"front"}, {}};
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<GroundTruthRecord> gts;
    std::vector<PredictionRecord> dets;
    const std::size_t n_gts = rng.next() % 8;
    for (std::size_t i = 0; i < n_gts; ++i) {
      gts.push_back(make_gt("img", test::random_box(rng, 60, 1, 25),
                            static_cast<State>(rng.next() % kStateCount),
                            tag_pool[rng.next() % tag_pool.size()]));
    }
    const std::size_t n_dets = rng.next() % 10;
    for (std::size_t i = 0; i < n_dets; ++i) {
      const BoundingBox box = (rng.bernoulli(0.6) && !gts.empty())
                                  ? BoundingBox::from_xywh(
                                        gts[rng.next() % gts.size()].box.x_min +
                                            rng.uniform(-2.0, 2.0),
                                        gts[rng.next() % gts.size()].box.y_min +
                                            rng.uniform(-2.0, 2.0),
                                        rng.uniform(2.0, 20.0), rng.uniform(2.0, 20.0))
                                  : test::random_box(rng, 60, 1, 25);
      dets.push_back(make_det("img", box, rng.uniform(0.0, 1.0),
                              static_cast<State>(rng.next() % kStateCount)));
    }
    EvalConfig config;
    config.iou_threshold = rng.uniform(0.1, 0.7);
    if (rng.bernoulli(0.3)) config.state_filter = static_cast<State>(rng.next() % kStateCount);
    if (rng.bernoulli(0.3)) config.min_width = rng.uniform(0.0, 10.0);

    const ImageScore score = score_image(gts, dets, config);
    std::int64_t active = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (!score.gt_dont_care[g]) ++active;
    }
    EXPECT_EQ(score.tp + score.fn, active);
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    for (const Disposition d : score.detections) {
      tp += d == Disposition::tp;
      fp += d == Disposition::fp;
    }
    EXPECT_EQ(tp, score.tp);
    EXPECT_EQ(fp, score.fp);
    for (std::size_t g = 0; g < gts.size(); ++g) {
      EXPECT_EQ(score.gt_hit[g], score.gt_claim_confidence[g] >= 0.0);
      if (score.gt_dont_care[g]) EXPECT_FALSE(score.gt_hit[g]);
    }
  }
}

/// Scoring only the detections above a confidence cut must agree with
/// cutting the full run's claims at that confidence. The streaming
/// evaluator's single-pass ROC relies on exactly this.
TEST(ScoreImagePropertyTest, GreedyClaimsArePrefixStable) {
  SplitMix64 rng(802);
  for (int iter = 0; iter < 150; ++iter) {
    std::vector<GroundTruthRecord> gts;
    std::vector<PredictionRecord> dets;
    const std::size_t n_gts = 1 + rng.next() % 6;
    for (std::size_t i = 0; i < n_gts; ++i) {
      gts.push_back(make_gt("img", test::random_box(rng, 40, 2, 15), State::red,
                            rng.bernoulli(0.2) ? std::vector<std::string>{"left"}
                                               : std::vector<std::string>{"front", "vehicle"}));
    }
    const std::size_t n_dets = 1 + rng.next() % 12;
    for (std::size_t i = 0; i < n_dets; ++i) {
      const GroundTruthRecord& target = gts[rng.next() % gts.size()];
      dets.push_back(make_det(
          "img",
          BoundingBox::from_xywh(target.box.x_min + rng.uniform(-3.0, 3.0),
                                 target.box.y_min + rng.uniform(-3.0, 3.0),
                                 target.box.width(), target.box.height()),
          std::floor(rng.uniform(0.0, 1.0) * 10.0) / 10.0));
    }
    EvalConfig config;
    config.iou_threshold = 0.3;
    const ImageScore full = score_image(gts, dets, config);

    const double cut = std::floor(rng.uniform(0.0, 1.0) * 10.0) / 10.0;
    std::vector<PredictionRecord> above;
    std::vector<std::size_t> index_map;
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (dets[d].confidence >= cut) {
        above.push_back(dets[d]);
        index_map.push_back(d);
      }
    }
    const ImageScore prefix = score_image(gts, above, config);

    std::int64_t expected_tp = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (!full.gt_dont_care[g] && full.gt_claim_confidence[g] >= cut) ++expected_tp;
    }
    EXPECT_EQ(prefix.tp, expected_tp);
    for (std::size_t i = 0; i < above.size(); ++i) {
      EXPECT_EQ(prefix.detections[i], full.detections[index_map[i]]);
    }
  }
}

RocCurve curve_of(std::vector<RocPoint> points) {
  RocCurve curve;
  curve.points = std::move(points);
  return curve;
}

TEST(MissRateAtFppiTest, StepRuleAndClamping) {
  const RocCurve curve = curve_of({
      {0.1, 5.0, 0.2},
      {0.5, 0.8, 0.5},
      {0.9, 0.05, 0.9},
  });
  EXPECT_DOUBLE_EQ(miss_rate_at_fppi(curve, 10.0), 0.2);
  EXPECT_DOUBLE_EQ(miss_rate_at_fppi(curve, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(miss_rate_at_fppi(curve, 0.5), 0.9);
  EXPECT_DOUBLE_EQ(miss_rate_at_fppi(curve, 0.01), 0.9);  // below all: clamp to min FPPI
  EXPECT_THROW(miss_rate_at_fppi(curve_of({}), 1.0), std::invalid_argument);
}

TEST(MissRateAtFppiTest, EqualFppiTakesLowestMissRate) {
  const RocCurve curve = curve_of({
      {0.1, 0.8, 0.5},
      {0.2, 0.8, 0.45},
      {0.3, 0.8, 0.62},
  });
  EXPECT_DOUBLE_EQ(miss_rate_at_fppi(curve, 1.0), 0.45);
  EXPECT_DOUBLE_EQ(miss_rate_at_fppi(curve, 0.1), 0.45);  // clamp path, same tie rule
}

TEST(LamrTest, AnalyticCurves) {
  const RocCurve flat = curve_of({{0.1, 10.0, 0.3}, {0.5, 1.0, 0.3}, {0.9, 0.1, 0.3}});
  EXPECT_DOUBLE_EQ(lamr(flat), 0.3);

  const RocCurve steps = curve_of({{0.1, 10.0, 0.3}, {0.5, 1.0, 0.6}, {0.9, 0.1, 0.9}});
  EXPECT_DOUBLE_EQ(lamr(steps), (0.9 + 0.6 + 0.3) / 3.0);
}

TEST(LamrPropertyTest, BoundedByCurveExtremes) {
  SplitMix64 rng(803);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<RocPoint> points;
    const std::size_t n = 1 + rng.next() % 12;
    double fppi = rng.uniform(0.0, 20.0);
    for (std::size_t i = 0; i < n; ++i) {
      points.push_back({static_cast<double>(i + 1) / static_cast<double>(n), fppi,
                        rng.uniform(0.0, 1.0)});
      fppi = std::max(0.0, fppi - rng.uniform(0.0, 4.0));  // nonincreasing like real curves
    }
    const RocCurve curve = curve_of(points);
    double lo = 1.0;
    double hi = 0.0;
    for (const RocPoint& p : curve.points) {
      lo = std::min(lo, p.miss_rate);
      hi = std::max(hi, p.miss_rate);
    }
    const double value = lamr(curve);
    EXPECT_GE(value, lo - 1e-12);
    EXPECT_LE(value, hi + 1e-12);
  }
}

class FixtureTest : public ::testing::Test {
 protected:
  static std::string data_path(const std::string& name) {
    return std::string(ANCHORKIT_TEST_DATA_DIR) + "/" + name;
  }

  EvalReport run(EvalConfig config, double operating_fppi = 1.0) {
    Evaluator evaluator(std::move(config), 1000);
    stream_labels_file(data_path("fixture_labels.jsonl"),
                       [&](GroundTruthRecord&& r) { evaluator.add_label(std::move(r)); });
    stream_detections_file(data_path("fixture_dets.jsonl"),
                           [&](PredictionRecord&& r) { evaluator.add_detection(r); });
    return evaluator.finalize(operating_fppi, 1.0);
  }
};

TEST_F(FixtureTest, TotalsMatchHandCount) {
  const EvalReport report = run(EvalConfig{});
  EXPECT_EQ(report.totals.images, 5);
  EXPECT_EQ(report.totals.labels, 9);
  EXPECT_EQ(report.totals.dont_care, 2);
  EXPECT_EQ(report.totals.detections, 9);
  EXPECT_EQ(report.totals.tp, 5);
  EXPECT_EQ(report.totals.fp, 3);
  EXPECT_EQ(report.totals.fn, 2);
}

TEST_F(FixtureTest, OperatingPointPicksClosestFppi) {
  const EvalReport report = run(EvalConfig{});
  // FPPI levels are 0.6, 0.4, 0.2, 0; 0.6 is nearest the budget of 1.
  EXPECT_DOUBLE_EQ(report.width.fppi, 0.6);
  EXPECT_DOUBLE_EQ(report.width.confidence, 0.2);  // ties resolve to the highest threshold
  EXPECT_DOUBLE_EQ(report.operating_fppi, 1.0);
}

TEST_F(FixtureTest, RocMatchesHandEnumeration) {
  const EvalReport report = run(EvalConfig{});
  ASSERT_EQ(report.roc.points.size(), 1000u);
  auto point_at = [&](int k) { return report.roc.points[static_cast<std::size_t>(k - 1)]; };
  EXPECT_DOUBLE_EQ(point_at(200).confidence, 0.2);
  EXPECT_DOUBLE_EQ(point_at(200).fppi, 0.6);
  EXPECT_DOUBLE_EQ(point_at(200).miss_rate, 2.0 / 7.0);
  EXPECT_DOUBLE_EQ(point_at(201).fppi, 0.4);
  EXPECT_DOUBLE_EQ(point_at(400).miss_rate, 2.0 / 7.0);
  EXPECT_DOUBLE_EQ(point_at(401).miss_rate, 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(point_at(600).fppi, 0.2);
  EXPECT_DOUBLE_EQ(point_at(601).fppi, 0.0);
  EXPECT_DOUBLE_EQ(point_at(601).miss_rate, 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(point_at(700).miss_rate, 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(point_at(701).miss_rate, 4.0 / 7.0);
  EXPECT_DOUBLE_EQ(point_at(1000).miss_rate, 1.0);
  EXPECT_DOUBLE_EQ(point_at(1000).fppi, 0.0);

  for (std::size_t i = 1; i < report.roc.points.size(); ++i) {
    EXPECT_LE(report.roc.points[i].fppi, report.roc.points[i - 1].fppi);
    EXPECT_GE(report.roc.points[i].miss_rate, report.roc.points[i - 1].miss_rate);
  }
}

TEST_F(FixtureTest, LamrIsOneThird) {
  // miss(0.1) reads the zero-FPPI plateau: 3/7. miss(1) and miss(10) read
  // the 0.6-FPPI level: 2/7 each. Mean: 1/3.
  const EvalReport report = run(EvalConfig{});
  EXPECT_NEAR(miss_rate_at_fppi(report.roc, 0.1), 3.0 / 7.0, 1e-12);
  EXPECT_NEAR(miss_rate_at_fppi(report.roc, 1.0), 2.0 / 7.0, 1e-12);
  EXPECT_NEAR(miss_rate_at_fppi(report.roc, 10.0), 2.0 / 7.0, 1e-12);
  EXPECT_NEAR(report.lamr, 1.0 / 3.0, 1e-12);
}

TEST_F(FixtureTest, WidthBinsMatchHandCount) {
  const EvalReport report = run(EvalConfig{});
  ASSERT_EQ(report.width.bins.size(), 3u);
  EXPECT_DOUBLE_EQ(report.width.bins[0].width_lo, 4.0);
  EXPECT_EQ(report.width.bins[0].detected, 1);
  EXPECT_EQ(report.width.bins[0].total, 2);
  EXPECT_DOUBLE_EQ(report.width.bins[0].recall(), 0.5);
  EXPECT_DOUBLE_EQ(report.width.bins[1].width_lo, 8.0);
  EXPECT_EQ(report.width.bins[1].detected, 1);
  EXPECT_EQ(report.width.bins[1].total, 1);
  EXPECT_DOUBLE_EQ(report.width.bins[2].width_lo, 10.0);
  EXPECT_EQ(report.width.bins[2].detected, 3);
  EXPECT_EQ(report.width.bins[2].total, 4);
}

TEST_F(FixtureTest, TrackRecallMatchesHandCount) {
  const EvalReport report = run(EvalConfig{});
  ASSERT_EQ(report.tracks.tracks.size(), 3u);
  EXPECT_EQ(report.tracks.tracks[0].track_id, "t1");
  EXPECT_EQ(report.tracks.tracks[0].occurrences, 3);
  EXPECT_EQ(report.tracks.tracks[0].detected, 3);
  EXPECT_DOUBLE_EQ(report.tracks.tracks[0].p_track, 1.0);
  EXPECT_EQ(report.tracks.tracks[1].track_id, "t2");
  EXPECT_DOUBLE_EQ(report.tracks.tracks[1].p_track, 0.5);
  EXPECT_EQ(report.tracks.tracks[2].track_id, "t3");
  EXPECT_DOUBLE_EQ(report.tracks.tracks[2].p_track, 0.5);
  EXPECT_NEAR(report.tracks.high_share, 1.0 / 3.0, 1e-12);
  EXPECT_EQ(report.tracks.missing_track_records, 0);
}

TEST_F(FixtureTest, StateFilterScoresOnlyMatchingState) {
  EvalConfig config;
  config.state_filter = State::red;
  const EvalReport report = run(config);
  EXPECT_EQ(report.totals.tp, 3);
  EXPECT_EQ(report.totals.fp, 1);
  EXPECT_EQ(report.totals.fn, 0);
  EXPECT_EQ(report.totals.dont_care, 6);
  EXPECT_DOUBLE_EQ(report.lamr, 0.0);
}

TEST(EvaluatorTest, PerfectDetectorHasZeroLamr) {
  Evaluator evaluator(EvalConfig{}, 100);
  SplitMix64 rng(804);
  std::vector<GroundTruthRecord> gts;
  for (int i = 0; i < 20; ++i) {
    gts.push_back(make_gt("img" + std::to_string(i % 7), test::random_box(rng, 100, 2, 20)));
    evaluator.add_label(gts.back());
  }
  for (const GroundTruthRecord& gt : gts) {
    evaluator.add_detection(make_det(gt.image_id, gt.box, 1.0));
  }
  const EvalReport report = evaluator.finalize();
  EXPECT_DOUBLE_EQ(report.lamr, 0.0);
  for (const RocPoint& p : report.roc.points) {
    EXPECT_DOUBLE_EQ(p.miss_rate, 0.0);
    EXPECT_DOUBLE_EQ(p.fppi, 0.0);
  }
  EXPECT_EQ(report.totals.fn, 0);
}

TEST(EvaluatorTest, EmptyDetectorMissesEverything) {
  Evaluator evaluator(EvalConfig{}, 100);
  evaluator.add_label(make_gt("a", BoundingBox::from_xywh(0, 0, 10, 10)));
  evaluator.add_label(make_gt("b", BoundingBox::from_xywh(0, 0, 10, 10)));
  const EvalReport report = evaluator.finalize();
  EXPECT_DOUBLE_EQ(report.lamr, 1.0);
  for (const RocPoint& p : report.roc.points) {
    EXPECT_DOUBLE_EQ(p.miss_rate, 1.0);
    EXPECT_DOUBLE_EQ(p.fppi, 0.0);
  }
}

TEST(EvaluatorTest, NinetyPercentTrackCountsAsHigh) {
  Evaluator evaluator(EvalConfig{}, 10);
  const BoundingBox box = BoundingBox::from_xywh(0, 0, 10, 10);
  for (int i = 0; i < 10; ++i) {
    GroundTruthRecord gt = make_gt("img" + std::to_string(i), box, State::red,
                                   {"front", "vehicle"}, "steady");
    evaluator.add_label(gt);
  }
  GroundTruthRecord flaky = make_gt("img0", BoundingBox::from_xywh(50, 50, 10, 10), State::red,
                                    {"front", "vehicle"}, "flaky");
  evaluator.add_label(flaky);
  GroundTruthRecord untracked = make_gt("img1", BoundingBox::from_xywh(80, 80, 10, 10));
  evaluator.add_label(untracked);

  for (int i = 0; i < 9; ++i) {  // miss the track on img9
    evaluator.add_detection(make_det("img" + std::to_string(i), box, 1.0));
  }
  const EvalReport report = evaluator.finalize();
  ASSERT_EQ(report.tracks.tracks.size(), 2u);
  EXPECT_EQ(report.tracks.tracks[0].track_id, "flaky");
  EXPECT_DOUBLE_EQ(report.tracks.tracks[0].p_track, 0.0);
  EXPECT_EQ(report.tracks.tracks[1].track_id, "steady");
  EXPECT_EQ(report.tracks.tracks[1].occurrences, 10);
  EXPECT_EQ(report.tracks.tracks[1].detected, 9);
  EXPECT_DOUBLE_EQ(report.tracks.tracks[1].p_track, 0.9);
  EXPECT_DOUBLE_EQ(report.tracks.high_share, 0.5);
  EXPECT_EQ(report.tracks.missing_track_records, 1);
}

TEST(EvaluatorTest, RejectsMisorderedAndUnknownInput) {
  Evaluator evaluator(EvalConfig{});
  evaluator.add_label(make_gt("a", BoundingBox::from_xywh(0, 0, 10, 10)));
  EXPECT_THROW(
      evaluator.add_detection(make_det("ghost", BoundingBox::from_xywh(0, 0, 1, 1), 0.5)),
      ParseError);
  evaluator.add_detection(make_det("a", BoundingBox::from_xywh(0, 0, 10, 10), 0.5));
  EXPECT_THROW(evaluator.add_label(make_gt("b", BoundingBox::from_xywh(0, 0, 10, 10))),
               std::invalid_argument);

  Evaluator empty(EvalConfig{});
  EXPECT_THROW(empty.finalize(), std::invalid_argument);

  Evaluator bad_bin(EvalConfig{});
  bad_bin.add_label(make_gt("a", BoundingBox::from_xywh(0, 0, 10, 10)));
  EXPECT_THROW(bad_bin.finalize(1.0, 0.5), std::invalid_argument);

  EXPECT_THROW(Evaluator(EvalConfig{}, 0), std::invalid_argument);
  EvalConfig bad_iou;
  bad_iou.iou_threshold = 1.0;
  EXPECT_THROW(Evaluator(bad_iou, 100), std::invalid_argument);
}

/// The single scoring pass plus suffix sums must equal re-scoring every
/// image with only the detections above each grid threshold.
TEST(EvaluatorPropertyTest, CurveEqualsPerThresholdRescoring) {
  SplitMix64 rng(805);
  const int grid = 25;
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n_images = 1 + rng.next() % 6;
    std::vector<std::vector<GroundTruthRecord>> gts(n_images);
    std::vector<std::vector<PredictionRecord>> dets(n_images);
    EvalConfig config;
    config.iou_threshold = rng.uniform(0.2, 0.6);
    if (rng.bernoulli(0.25)) config.state_filter = static_cast<State>(rng.next() % kStateCount);

    Evaluator evaluator(config, grid);
    for (std::size_t i = 0; i < n_images; ++i) {
      const std::string image_id = "img" + std::to_string(i);
      const std::size_t n_gts = 1 + rng.next() % 5;
      for (std::size_t g = 0; g < n_gts; ++g) {
        gts[i].push_back(make_gt(
            image_id, test::random_box(rng, 50, 2, 20),
            static_cast<State>(rng.next() % kStateCount),
            rng.bernoulli(0.25) ? std::vector<std::string>{"back"}
                                : std::vector<std::string>{"front", "vehicle"}));
        evaluator.add_label(gts[i].back());
      }
    }
    for (std::size_t i = 0; i < n_images; ++i) {
      const std::string image_id = "img" + std::to_string(i);
      const std::size_t n_dets = rng.next() % 8;
      for (std::size_t d = 0; d < n_dets; ++d) {
        const BoundingBox& base = gts[i][rng.next() % gts[i].size()].box;
        const BoundingBox box = rng.bernoulli(0.7)
                                    ? BoundingBox::from_xywh(base.x_min + rng.uniform(-2.0, 2.0),
                                                             base.y_min + rng.uniform(-2.0, 2.0),
                                                             base.width(), base.height())
                                    : test::random_box(rng, 50, 2, 20);
        double confidence = rng.uniform(0.0, 1.0);
        if (rng.bernoulli(0.25)) {
          confidence = static_cast<double>(rng.next() % (grid + 1)) / grid;  // land on the grid
        }
        dets[i].push_back(make_det(image_id, box, confidence,
                                   static_cast<State>(rng.next() % kStateCount)));
        evaluator.add_detection(dets[i].back());
      }
    }
    const EvalReport report = evaluator.finalize();

    std::int64_t active = 0;
    for (std::size_t i = 0; i < n_images; ++i) {
      for (const GroundTruthRecord& gt : gts[i]) {
        if (!is_dont_care(gt, config)) ++active;
      }
    }
    for (int k = 1; k <= grid; ++k) {
      const double threshold = static_cast<double>(k) / grid;
      std::int64_t tp = 0;
      std::int64_t fp = 0;
      for (std::size_t i = 0; i < n_images; ++i) {
        std::vector<PredictionRecord> above;
        for (const PredictionRecord& det : dets[i]) {
          if (det.confidence >= threshold) above.push_back(det);
        }
        const ImageScore score = score_image(gts[i], above, config);
        tp += score.tp;
        fp += score.fp;
      }
      const RocPoint& point = report.roc.points[static_cast<std::size_t>(k - 1)];
      EXPECT_DOUBLE_EQ(point.confidence, threshold);
      EXPECT_DOUBLE_EQ(point.fppi,
                       static_cast<double>(fp) / static_cast<double>(n_images));
      EXPECT_DOUBLE_EQ(point.miss_rate,
                       active > 0 ? static_cast<double>(active - tp) /
                                        static_cast<double>(active)
                                  : 0.0);
    }
  }
}

TEST(EvaluatorPropertyTest, DontCareAdditionsChangeNothing) {
  SplitMix64 rng(806);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n_images = 1 + rng.next() % 4;
    std::vector<GroundTruthRecord> labels;
    std::vector<PredictionRecord> dets;
    for (std::size_t i = 0; i < n_images; ++i) {
      const std::string image_id = "img" + std::to_string(i);
      const std::size_t n_gts = 1 + rng.next() % 4;
      for (std::size_t g = 0; g < n_gts; ++g) {
        labels.push_back(make_gt(image_id, test::random_box(rng, 40, 2, 15)));
        if (rng.bernoulli(0.7)) {
          dets.push_back(make_det(image_id, labels.back().box, rng.uniform(0.1, 1.0)));
        }
      }
      if (rng.bernoulli(0.5)) {
        dets.push_back(make_det(image_id, test::random_box(rng, 40, 2, 15),
                                rng.uniform(0.1, 1.0)));
      }
    }
    auto run = [&](const std::vector<GroundTruthRecord>& all_labels) {
      Evaluator evaluator(EvalConfig{}, 50);
      for (const GroundTruthRecord& label : all_labels) evaluator.add_label(label);
      for (const PredictionRecord& det : dets) evaluator.add_detection(det);
      return evaluator.finalize();
    };
    const EvalReport before = run(labels);

    std::vector<GroundTruthRecord> padded = labels;
    const std::size_t extra = 1 + rng.next() % 5;
    for (std::size_t e = 0; e < extra; ++e) {
      // Far outside the detection span, tagged for exclusion.
      padded.push_back(make_gt("img0",
                               BoundingBox::from_xywh(1000 + rng.uniform(0.0, 400.0),
                                                      1000 + rng.uniform(0.0, 400.0),
                                                      rng.uniform(2.0, 15.0),
                                                      rng.uniform(2.0, 15.0)),
                               State::red, {"left", "pedestrian"}));
    }
    const EvalReport after = run(padded);

    EXPECT_EQ(after.totals.tp, before.totals.tp);
    EXPECT_EQ(after.totals.fp, before.totals.fp);
    EXPECT_EQ(after.totals.fn, before.totals.fn);
    EXPECT_EQ(after.totals.dont_care,
              before.totals.dont_care + static_cast<std::int64_t>(extra));
    EXPECT_DOUBLE_EQ(after.lamr, before.lamr);
    ASSERT_EQ(after.roc.points.size(), before.roc.points.size());
    for (std::size_t i = 0; i < after.roc.points.size(); ++i) {
      EXPECT_DOUBLE_EQ(after.roc.points[i].fppi, before.roc.points[i].fppi);
      EXPECT_DOUBLE_EQ(after.roc.points[i].miss_rate, before.roc.points[i].miss_rate);
    }
  }
}

TEST(RocFunctionTest, OneShotCurveMatchesEvaluator) {
  std::vector<GroundTruthRecord> labels = {
      make_gt("a", BoundingBox::from_xywh(0, 0, 10, 10)),
      make_gt("b", BoundingBox::from_xywh(5, 5, 8, 8)),
  };
  std::vector<PredictionRecord> dets = {
      make_det("a", BoundingBox::from_xywh(0, 0, 10, 10), 0.8),
      make_det("b", BoundingBox::from_xywh(40, 40, 8, 8), 0.6),
  };
  const RocCurve curve = roc(labels, dets, EvalConfig{}, 10);
  ASSERT_EQ(curve.points.size(), 10u);
  EXPECT_DOUBLE_EQ(curve.points[5].fppi, 0.5);  // threshold 0.6 keeps the false positive
  EXPECT_DOUBLE_EQ(curve.points[5].miss_rate, 0.5);
  EXPECT_DOUBLE_EQ(curve.points[8].fppi, 0.0);  // threshold 0.9 drops everything
  EXPECT_DOUBLE_EQ(curve.points[8].miss_rate, 1.0);
}

}  // namespace
}  // namespace anchorkit
