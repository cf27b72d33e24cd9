#pragma once

#include <cstdint>
#include <vector>

#include <anchorkit/records.hpp>

namespace anchorkit {

/// Tiny deterministic generator (splitmix64). Identical seeds give
/// identical sequences on every platform, which keeps synthesized
/// datasets byte-identical across runs.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Knuth inversion; meant for small means.
  std::int64_t poisson(double mean);

 private:
  std::uint64_t state_;
};

/// Parameters of the synthesized label/detection pair. Images are grouped
/// into sequences; each sequence carries a persistent set of tracks that
/// drift a little per frame, so track recall has real structure. Every
/// image holds at least one object, keeping the image set recoverable
/// from the label stream alone.
struct SynthConfig {
  std::uint64_t seed = 1;
  std::int64_t n_images = 100;
  double width_min = 3.0;   // ground-truth widths drawn uniformly
  double width_max = 40.0;
  double aspect_ratio = 3.0;  // height = ratio * width
  double fp_rate = 0.5;       // expected stray false positives per image
  double miss_rate = 0.1;     // probability an object goes undetected
  double dc_rate = 0.1;       // probability an object is tagged don't-care
  double double_det_rate = 0.0;  // probability a detected object gets a duplicate
  double jitter = 0.05;          // detection center/size error, fraction of extent
  double image_w = 2048.0;
  double image_h = 512.0;
  double mean_objects = 4.0;  // per image (Poisson, floored at one)
  int sequence_length = 10;   // frames per sequence

  /// Throws std::invalid_argument on out-of-range parameters. Jitter is
  /// capped at 0.1 so an emitted detection always overlaps its object
  /// above IoU 0.5 and the miss/false-positive rates translate directly
  /// into evaluation counts.
  void validate() const;
};

struct SynthDataset {
  std::vector<GroundTruthRecord> labels;
  std::vector<PredictionRecord> detections;
};

/// Deterministic pseudo-random dataset: true detections are jittered
/// copies of their objects with confidence in [0.5, 1); stray false
/// positives and duplicates score lower. Don't-care objects are tagged
/// non-front or non-vehicle and still attract (ignorable) detections.
SynthDataset synth_dataset(const SynthConfig& config);

}  // namespace anchorkit
