#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <anchorkit/records.hpp>
#include <anchorkit/state.hpp>

namespace anchorkit {

/// Evaluation filters. A ground truth is don't-care (ignored by both the
/// false-positive and false-negative accounting) when the tag rule says
/// so, when it is narrower than min_width, or when a state filter is set
/// and its state differs. The default tag rule: missing 'front' tag, or
/// any of the pedestrian/cyclist/tram/bus tags. With a state filter set,
/// detections of other states are dropped before scoring.
struct EvalConfig {
  double iou_threshold = 0.3;
  double min_width = 0.0;
  std::optional<State> state_filter;
  std::function<bool(const GroundTruthRecord&)> dc_rules;  // overrides the tag rule
};

bool is_dont_care(const GroundTruthRecord& record, const EvalConfig& config);

enum class Disposition : std::uint8_t {
  tp,       // claimed a ground truth
  fp,       // matched nothing
  ignored,  // overlapped only don't-care ground truth
  dropped,  // filtered out by the state filter
};

/// Outcome of scoring one image. Vectors parallel the input order.
struct ImageScore {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::vector<bool> gt_dont_care;
  std::vector<bool> gt_hit;
  std::vector<double> gt_claim_confidence;  // -1 when unclaimed or don't-care
  std::vector<Disposition> detections;
};

/// Greedy single-image scoring. Detections are visited by descending
/// confidence (ties: input order); each claims the unclaimed non-dc
/// ground truth of largest IoU >= threshold. A detection claiming nothing
/// is ignored when it overlaps a don't-care ground truth at >= threshold,
/// otherwise a false positive. Unclaimed non-dc ground truths are false
/// negatives, so tp + fn equals the non-dc count.
ImageScore score_image(const std::vector<GroundTruthRecord>& gts,
                       const std::vector<PredictionRecord>& dets, const EvalConfig& config);

struct RocPoint {
  double confidence = 0.0;
  double fppi = 0.0;
  double miss_rate = 0.0;
};

/// Operating points sampled on an ascending uniform confidence grid.
/// FPPI is nonincreasing along the curve.
struct RocCurve {
  std::vector<RocPoint> points;
};

/// Miss rate read from the curve at an FPPI budget: the point with the
/// largest FPPI not above the target; among equal FPPI the lowest miss
/// rate wins. Targets below every point clamp to the smallest-FPPI
/// points.
double miss_rate_at_fppi(const RocCurve& curve, double target_fppi);

/// Mean miss rate over the FPPI budgets 0.1, 1, and 10.
double lamr(const RocCurve& curve);

struct WidthRecallBin {
  double width_lo = 0.0;
  double width_hi = 0.0;
  std::int64_t detected = 0;
  std::int64_t total = 0;

  double recall() const { return total > 0 ? static_cast<double>(detected) / total : 0.0; }
};

/// Per-width recall at one confidence threshold (empty bins are omitted).
struct WidthRecall {
  double confidence = 0.0;
  double fppi = 0.0;
  double bin_width = 1.0;
  std::vector<WidthRecallBin> bins;
};

struct TrackEntry {
  std::string track_id;
  std::int64_t occurrences = 0;
  std::int64_t detected = 0;
  double p_track = 0.0;
};

/// Per-track detection frequency at one confidence threshold. high_share
/// is the fraction of tracks with p_track in [0.9, 1]. Non-dc ground
/// truths without a track id are excluded and counted.
struct TrackRecall {
  double confidence = 0.0;
  std::vector<TrackEntry> tracks;  // ordered by track id
  double high_share = 0.0;
  std::int64_t missing_track_records = 0;
};

struct EvalTotals {
  std::int64_t images = 0;
  std::int64_t labels = 0;
  std::int64_t dont_care = 0;
  std::int64_t detections = 0;
  // Confusion counts at the operating threshold.
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

struct EvalReport {
  RocCurve roc;
  double lamr = 0.0;
  WidthRecall width;
  TrackRecall tracks;
  EvalTotals totals;
  double operating_fppi = 0.0;  // requested budget behind width/tracks/totals
};

/// Streaming evaluation over many images. Feed every label before the
/// first detection; a detection naming an image with no labels is
/// rejected. Images are scored once, at finalize, and every confidence
/// threshold is derived from that single pass, so memory holds one
/// compact entry per record rather than per (record, threshold) pair.
class Evaluator {
 public:
  explicit Evaluator(EvalConfig config, int grid_size = 1000);

  void add_label(GroundTruthRecord record);
  void add_detection(const PredictionRecord& record);

  /// Scores all images and assembles the report. The width/track sections
  /// use the grid threshold whose FPPI lands closest to operating_fppi
  /// (ties: the higher threshold).
  EvalReport finalize(double operating_fppi = 1.0, double width_bin = 1.0);

  std::int64_t image_count() const { return static_cast<std::int64_t>(images_.size()); }

 private:
  struct CompactDet {
    BoundingBox box;
    double confidence = 0.0;
    State state = State::off;
  };
  struct ImageBucket {
    std::vector<GroundTruthRecord> gts;
    std::vector<CompactDet> dets;
  };

  EvalConfig config_;
  int grid_size_;
  std::map<std::string, ImageBucket> images_;  // ordered for reproducible passes
  std::int64_t label_count_ = 0;
  std::int64_t det_count_ = 0;
};

/// One-shot curve over in-memory records.
RocCurve roc(const std::vector<GroundTruthRecord>& labels,
             const std::vector<PredictionRecord>& detections, const EvalConfig& config,
             int grid_size = 1000);

}  // namespace anchorkit
