#include <anchorkit/synth.hpp>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace anchorkit {

namespace {

std::string format_id(const char* prefix, std::int64_t value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%s%06lld", prefix, static_cast<long long>(value));
  return buffer;
}

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

struct Track {
  std::string id;
  double center_x = 0.0;
  double center_y = 0.0;
  double width = 0.0;
  double drift = 0.0;  // horizontal pixels per frame
  State state = State::off;
  bool dont_care = false;
  bool pedestrian = false;  // which dc flavor the tags carry
};

}  // namespace

std::int64_t SplitMix64::poisson(double mean) {
  if (mean <= 0.0) return 0;
  const double limit = std::exp(-mean);
  std::int64_t k = 0;
  double product = 1.0;
  do {
    ++k;
    product *= uniform();
  } while (product > limit);
  return k - 1;
}

void SynthConfig::validate() const {
  require(n_images >= 1, "synth: n_images must be at least 1");
  require(std::isfinite(width_min) && width_min > 0.0 && width_max >= width_min,
          "synth: need 0 < width_min <= width_max");
  require(std::isfinite(aspect_ratio) && aspect_ratio > 0.0,
          "synth: aspect_ratio must be positive");
  require(fp_rate >= 0.0, "synth: fp_rate must be nonnegative");
  require(miss_rate >= 0.0 && miss_rate <= 1.0, "synth: miss_rate must lie in [0, 1]");
  require(dc_rate >= 0.0 && dc_rate <= 1.0, "synth: dc_rate must lie in [0, 1]");
  require(double_det_rate >= 0.0 && double_det_rate <= 1.0,
          "synth: double_det_rate must lie in [0, 1]");
  require(jitter >= 0.0 && jitter <= 0.1, "synth: jitter must lie in [0, 0.1]");
  require(image_w > 0.0 && image_h > 0.0, "synth: image size must be positive");
  require(mean_objects >= 0.0, "synth: mean_objects must be nonnegative");
  require(sequence_length >= 1, "synth: sequence_length must be at least 1");
}

SynthDataset synth_dataset(const SynthConfig& config) {
  config.validate();
  SplitMix64 rng(config.seed);
  SynthDataset out;
  std::int64_t next_track = 0;

  const auto jittered = [&](const BoundingBox& box) {
    const double w = box.width() * (1.0 + rng.uniform(-config.jitter, config.jitter));
    const double h = box.height() * (1.0 + rng.uniform(-config.jitter, config.jitter));
    const double cx = box.center_x() + rng.uniform(-config.jitter, config.jitter) * box.width();
    const double cy = box.center_y() + rng.uniform(-config.jitter, config.jitter) * box.height();
    return BoundingBox::from_center(cx, cy, w, h);
  };

  std::vector<Track> tracks;
  for (std::int64_t image = 0; image < config.n_images; ++image) {
    const std::int64_t sequence = image / config.sequence_length;
    const std::string image_id = format_id("img_", image);
    const std::string sequence_id = format_id("seq_", sequence);

    if (image % config.sequence_length == 0) {
      tracks.clear();
      const std::int64_t count = std::max<std::int64_t>(1, rng.poisson(config.mean_objects));
      for (std::int64_t t = 0; t < count; ++t) {
        Track track;
        track.id = format_id("t", next_track++);
        track.width = rng.uniform(config.width_min, config.width_max);
        const double height = config.aspect_ratio * track.width;
        track.center_x = rng.uniform(0.05 * config.image_w, 0.95 * config.image_w);
        track.center_y = rng.uniform(height, config.image_h - height);
        track.drift = rng.uniform(-2.0, 2.0);
        track.state = static_cast<State>(rng.next() % kStateCount);
        track.dont_care = rng.bernoulli(config.dc_rate);
        track.pedestrian = track.dont_care && rng.bernoulli(0.5);
        tracks.push_back(std::move(track));
      }
    }

    for (Track& track : tracks) {
      track.center_x += track.drift;
      GroundTruthRecord record;
      record.image_id = image_id;
      record.box = BoundingBox::from_center(track.center_x, track.center_y, track.width,
                                            config.aspect_ratio * track.width);
      record.state = track.state;
      record.track_id = track.id;
      if (!track.dont_care) {
        record.tags = {"front", "vehicle"};
      } else if (track.pedestrian) {
        record.tags = {"front", "pedestrian"};
      } else {
        record.tags = {"left", "vehicle"};
      }
      record.sequence_id = sequence_id;
      record.city = "synthville";
      out.labels.push_back(record);

      if (rng.bernoulli(config.miss_rate)) continue;
      PredictionRecord det;
      det.image_id = image_id;
      det.box = jittered(record.box);
      det.confidence = rng.uniform(0.5, 1.0);
      det.state = track.state;
      out.detections.push_back(det);
      if (rng.bernoulli(config.double_det_rate)) {
        PredictionRecord duplicate;
        duplicate.image_id = image_id;
        duplicate.box = jittered(record.box);
        duplicate.confidence = rng.uniform(0.3, 0.7);
        duplicate.state = track.state;
        out.detections.push_back(duplicate);
      }
    }

    const std::int64_t strays = rng.poisson(config.fp_rate);
    for (std::int64_t f = 0; f < strays; ++f) {
      PredictionRecord det;
      det.image_id = image_id;
      const double w = rng.uniform(config.width_min, config.width_max);
      det.box = BoundingBox::from_center(rng.uniform(0.0, config.image_w),
                                         rng.uniform(0.0, config.image_h), w,
                                         config.aspect_ratio * w);
      det.confidence = rng.uniform(0.05, 0.6);
      det.state = static_cast<State>(rng.next() % kStateCount);
      out.detections.push_back(det);
    }
  }
  return out;
}

}  // namespace anchorkit
