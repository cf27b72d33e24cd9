#include <anchorkit/eval.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <anchorkit/error.hpp>
#include <anchorkit/geometry.hpp>

namespace anchorkit {

namespace {

bool default_tag_rule(const GroundTruthRecord& record) {
  if (!record.has_tag("front")) return true;
  for (const char* audience : {"pedestrian", "cyclist", "tram", "bus"}) {
    if (record.has_tag(audience)) return true;
  }
  return false;
}

struct SortedDet {
  BoundingBox box;
  double confidence = 0.0;
  std::size_t input_index = 0;
};

std::vector<SortedDet> sort_dets(const std::vector<SortedDet>& dets) {
  std::vector<SortedDet> sorted = dets;
  std::stable_sort(sorted.begin(), sorted.end(), [](const SortedDet& a, const SortedDet& b) {
    return a.confidence > b.confidence;
  });
  return sorted;
}

// Shared greedy pass: fills per-gt claim confidences (-1 when unclaimed)
// and per-detection dispositions for the given, already sorted and
// state-filtered detections.
void score_sorted(const std::vector<GroundTruthRecord>& gts, const std::vector<bool>& dc,
                  const std::vector<SortedDet>& sorted, double threshold,
                  std::vector<double>& claim_confidence,
                  const std::function<void(std::size_t, Disposition)>& report) {
  std::vector<bool> claimed(gts.size(), false);
  for (const SortedDet& det : sorted) {
    double best = 0.0;
    std::int64_t best_gt = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (dc[g] || claimed[g]) continue;
      const double overlap = iou(det.box, gts[g].box);
      if (overlap >= threshold && overlap > best) {
        best = overlap;
        best_gt = static_cast<std::int64_t>(g);
      }
    }
    if (best_gt >= 0) {
      claimed[static_cast<std::size_t>(best_gt)] = true;
      claim_confidence[static_cast<std::size_t>(best_gt)] = det.confidence;
      report(det.input_index, Disposition::tp);
      continue;
    }
    bool absorbed = false;
    for (std::size_t g = 0; g < gts.size() && !absorbed; ++g) {
      absorbed = dc[g] && iou(det.box, gts[g].box) >= threshold;
    }
    report(det.input_index, absorbed ? Disposition::ignored : Disposition::fp);
  }
}

// Largest grid index k with k / grid <= confidence, or 0 when even the
// first threshold exceeds it. Float-exact against the same k / grid
// values the curve reports.
int grid_bucket(double confidence, int grid) {
  int k = std::clamp(static_cast<int>(std::floor(confidence * grid)), 0, grid);
  while (k + 1 <= grid && static_cast<double>(k + 1) / grid <= confidence) ++k;
  while (k >= 1 && static_cast<double>(k) / grid > confidence) --k;
  return k;
}

}  // namespace

bool is_dont_care(const GroundTruthRecord& record, const EvalConfig& config) {
  if (config.dc_rules ? config.dc_rules(record) : default_tag_rule(record)) return true;
  if (record.box.width() < config.min_width) return true;
  if (config.state_filter && record.state != *config.state_filter) return true;
  return false;
}

ImageScore score_image(const std::vector<GroundTruthRecord>& gts,
                       const std::vector<PredictionRecord>& dets, const EvalConfig& config) {
  ImageScore score;
  score.gt_dont_care.resize(gts.size());
  score.gt_hit.assign(gts.size(), false);
  score.gt_claim_confidence.assign(gts.size(), -1.0);
  score.detections.assign(dets.size(), Disposition::dropped);

  for (std::size_t g = 0; g < gts.size(); ++g) {
    score.gt_dont_care[g] = is_dont_care(gts[g], config);
  }

  std::vector<SortedDet> kept;
  kept.reserve(dets.size());
  for (std::size_t d = 0; d < dets.size(); ++d) {
    if (config.state_filter && dets[d].state != *config.state_filter) continue;
    kept.push_back({dets[d].box, dets[d].confidence, d});
  }

  std::vector<bool> dc(score.gt_dont_care.begin(), score.gt_dont_care.end());
  score_sorted(gts, dc, sort_dets(kept), config.iou_threshold, score.gt_claim_confidence,
               [&](std::size_t index, Disposition disposition) {
                 score.detections[index] = disposition;
               });

  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (dc[g]) continue;
    score.gt_hit[g] = score.gt_claim_confidence[g] >= 0.0;
    score.gt_hit[g] ? ++score.tp : ++score.fn;
  }
  for (const Disposition d : score.detections) {
    if (d == Disposition::fp) ++score.fp;
  }
  return score;
}

double miss_rate_at_fppi(const RocCurve& curve, double target_fppi) {
  if (curve.points.empty()) {
    throw std::invalid_argument("miss_rate_at_fppi: empty curve");
  }
  bool found = false;
  double best_fppi = 0.0;
  double best_miss = 1.0;
  for (const RocPoint& p : curve.points) {
    if (p.fppi > target_fppi) continue;
    if (!found || p.fppi > best_fppi || (p.fppi == best_fppi && p.miss_rate < best_miss)) {
      found = true;
      best_fppi = p.fppi;
      best_miss = p.miss_rate;
    }
  }
  if (found) return best_miss;
  // Every point sits beyond the budget: clamp to the smallest-FPPI points.
  double min_fppi = curve.points.front().fppi;
  for (const RocPoint& p : curve.points) min_fppi = std::min(min_fppi, p.fppi);
  double miss = 1.0;
  bool first = true;
  for (const RocPoint& p : curve.points) {
    if (p.fppi == min_fppi) {
      miss = first ? p.miss_rate : std::min(miss, p.miss_rate);
      first = false;
    }
  }
  return miss;
}

double lamr(const RocCurve& curve) {
  return (miss_rate_at_fppi(curve, 0.1) + miss_rate_at_fppi(curve, 1.0) +
          miss_rate_at_fppi(curve, 10.0)) /
         3.0;
}

Evaluator::Evaluator(EvalConfig config, int grid_size)
    : config_(std::move(config)), grid_size_(grid_size) {
  if (grid_size_ < 1) throw std::invalid_argument("Evaluator: grid_size must be positive");
  if (!(config_.iou_threshold > 0.0 && config_.iou_threshold < 1.0)) {
    throw std::invalid_argument("Evaluator: iou_threshold must lie in (0, 1)");
  }
}

void Evaluator::add_label(GroundTruthRecord record) {
  if (det_count_ > 0) {
    throw std::invalid_argument("Evaluator: all labels must precede the first detection");
  }
  images_[record.image_id].gts.push_back(std::move(record));
  ++label_count_;
}

void Evaluator::add_detection(const PredictionRecord& record) {
  const auto it = images_.find(record.image_id);
  if (it == images_.end()) {
    throw ParseError("detection references unknown image_id '" + record.image_id + "'");
  }
  it->second.dets.push_back({record.box, record.confidence, record.state});
  ++det_count_;
}

EvalReport Evaluator::finalize(double operating_fppi, double width_bin) {
  if (images_.empty()) throw std::invalid_argument("Evaluator: no labels added");
  if (!(width_bin >= 1.0)) throw std::invalid_argument("Evaluator: width_bin must be at least 1");

  struct GtEntry {
    double width;
    double claim_confidence;
    std::string track_id;
  };
  std::vector<GtEntry> entries;  // non-dc ground truths in image order
  entries.reserve(static_cast<std::size_t>(label_count_));
  std::vector<std::int64_t> tp_bucket(static_cast<std::size_t>(grid_size_) + 1, 0);
  std::vector<std::int64_t> fp_bucket(static_cast<std::size_t>(grid_size_) + 1, 0);
  std::int64_t dc_total = 0;

  for (const auto& [image_id, bucket] : images_) {
    (void)image_id;
    const std::vector<GroundTruthRecord>& gts = bucket.gts;
    std::vector<bool> dc(gts.size());
    for (std::size_t g = 0; g < gts.size(); ++g) dc[g] = is_dont_care(gts[g], config_);

    std::vector<SortedDet> kept;
    kept.reserve(bucket.dets.size());
    for (std::size_t d = 0; d < bucket.dets.size(); ++d) {
      const CompactDet& det = bucket.dets[d];
      if (config_.state_filter && det.state != *config_.state_filter) continue;
      kept.push_back({det.box, det.confidence, d});
    }

    std::vector<double> claim(gts.size(), -1.0);
    score_sorted(gts, dc, sort_dets(kept), config_.iou_threshold, claim,
                 [&](std::size_t index, Disposition disposition) {
                   const double conf = bucket.dets[index].confidence;
                   if (disposition == Disposition::tp) {
                     ++tp_bucket[static_cast<std::size_t>(grid_bucket(conf, grid_size_))];
                   } else if (disposition == Disposition::fp) {
                     ++fp_bucket[static_cast<std::size_t>(grid_bucket(conf, grid_size_))];
                   }
                 });

    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (dc[g]) {
        ++dc_total;
      } else {
        entries.push_back({gts[g].box.width(), claim[g], gts[g].track_id});
      }
    }
  }

  // Suffix sums turn per-bucket claim counts into counts at or above each
  // grid threshold; the greedy pass is prefix-stable, so one scoring run
  // serves every threshold.
  const auto active_total = static_cast<std::int64_t>(entries.size());
  const auto image_total = static_cast<std::int64_t>(images_.size());
  EvalReport report;
  report.operating_fppi = operating_fppi;
  report.roc.points.resize(static_cast<std::size_t>(grid_size_));
  std::int64_t tp_at = 0;
  std::int64_t fp_at = 0;
  for (int k = grid_size_; k >= 1; --k) {
    tp_at += tp_bucket[static_cast<std::size_t>(k)];
    fp_at += fp_bucket[static_cast<std::size_t>(k)];
    RocPoint& point = report.roc.points[static_cast<std::size_t>(k - 1)];
    point.confidence = static_cast<double>(k) / grid_size_;
    point.fppi = static_cast<double>(fp_at) / static_cast<double>(image_total);
    point.miss_rate = active_total > 0
                          ? static_cast<double>(active_total - tp_at) / active_total
                          : 0.0;
  }
  report.lamr = lamr(report.roc);

  // Operating threshold: grid point whose FPPI lands closest to the
  // requested budget, ties resolved toward the higher threshold.
  std::size_t best_index = 0;
  double best_gap = std::abs(report.roc.points[0].fppi - operating_fppi);
  for (std::size_t i = 1; i < report.roc.points.size(); ++i) {
    const double gap = std::abs(report.roc.points[i].fppi - operating_fppi);
    if (gap <= best_gap) {
      best_gap = gap;
      best_index = i;
    }
  }
  const RocPoint& operating = report.roc.points[best_index];

  report.width.confidence = operating.confidence;
  report.width.fppi = operating.fppi;
  report.width.bin_width = width_bin;
  if (!entries.empty()) {
    std::size_t lo = std::numeric_limits<std::size_t>::max();
    std::size_t hi = 0;
    for (const GtEntry& e : entries) {
      const auto bin = static_cast<std::size_t>(std::floor(e.width / width_bin));
      lo = std::min(lo, bin);
      hi = std::max(hi, bin);
    }
    std::vector<WidthRecallBin> bins(hi - lo + 1);
    for (std::size_t i = 0; i < bins.size(); ++i) {
      bins[i].width_lo = static_cast<double>(lo + i) * width_bin;
      bins[i].width_hi = static_cast<double>(lo + i + 1) * width_bin;
    }
    for (const GtEntry& e : entries) {
      WidthRecallBin& bin = bins[static_cast<std::size_t>(std::floor(e.width / width_bin)) - lo];
      ++bin.total;
      if (e.claim_confidence >= operating.confidence) ++bin.detected;
    }
    for (WidthRecallBin& bin : bins) {
      if (bin.total > 0) report.width.bins.push_back(bin);
    }
  }

  report.tracks.confidence = operating.confidence;
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> tracks;  // occurrences, detected
  for (const GtEntry& e : entries) {
    if (e.track_id.empty()) {
      ++report.tracks.missing_track_records;
      continue;
    }
    auto& [occurrences, detected] = tracks[e.track_id];
    ++occurrences;
    if (e.claim_confidence >= operating.confidence) ++detected;
  }
  std::int64_t high = 0;
  for (const auto& [track_id, counts] : tracks) {
    TrackEntry entry;
    entry.track_id = track_id;
    entry.occurrences = counts.first;
    entry.detected = counts.second;
    entry.p_track = static_cast<double>(counts.second) / static_cast<double>(counts.first);
    if (entry.p_track >= 0.9) ++high;
    report.tracks.tracks.push_back(std::move(entry));
  }
  report.tracks.high_share =
      tracks.empty() ? 0.0 : static_cast<double>(high) / static_cast<double>(tracks.size());

  report.totals.images = image_total;
  report.totals.labels = label_count_;
  report.totals.dont_care = dc_total;
  report.totals.detections = det_count_;
  std::int64_t tp_operating = 0;
  std::int64_t fp_operating = 0;
  for (std::size_t k = best_index + 1; k <= static_cast<std::size_t>(grid_size_); ++k) {
    tp_operating += tp_bucket[k];
    fp_operating += fp_bucket[k];
  }
  report.totals.tp = tp_operating;
  report.totals.fp = fp_operating;
  report.totals.fn = active_total - tp_operating;
  return report;
}

RocCurve roc(const std::vector<GroundTruthRecord>& labels,
             const std::vector<PredictionRecord>& detections, const EvalConfig& config,
             int grid_size) {
  Evaluator evaluator(config, grid_size);
  for (const GroundTruthRecord& label : labels) evaluator.add_label(label);
  for (const PredictionRecord& det : detections) evaluator.add_detection(det);
  return evaluator.finalize().roc;
}

}  // namespace anchorkit
