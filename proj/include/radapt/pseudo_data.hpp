#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radapt/image.hpp"
#include "radapt/random.hpp"

namespace radapt {

/// How the pseudo target is rescaled from the restored crop.
struct ScaleMode {
  enum class Kind { none, fixed, random, upscale };
  Kind kind = Kind::random;
  double lo = 0.8;
  double hi = 0.95;

  static ScaleMode none() { return {Kind::none, 1.0, 1.0}; }
  static ScaleMode fixed(double f) { return {Kind::fixed, f, f}; }
  static ScaleMode random(double lo, double hi) { return {Kind::random, lo, hi}; }
  static ScaleMode upscale(double lo, double hi) { return {Kind::upscale, lo, hi}; }

  /// "none", "fixed:F", "random:LO:HI", "upscale:LO:HI".
  static ScaleMode parse(const std::string& text);
  std::string to_string() const;

  friend bool operator==(const ScaleMode&, const ScaleMode&) = default;
};

struct SamplerConfig {
  int patch_size_hr = 64;
  double scale_min = 0.8;
  double scale_max = 0.95;
  ScaleMode::Kind mode = ScaleMode::Kind::random;
  int sr_scale = 4;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Sampler config drawing factors per `mode`, other fields taken from `base`.
SamplerConfig make_scale_mode(const ScaleMode& mode, SamplerConfig base = {});

struct CropRect {
  Index y = 0, x = 0, height = 0, width = 0;
  friend bool operator==(const CropRect&, const CropRect&) = default;
};

struct PairProvenance {
  std::size_t frame_index = 0;
  CropRect crop;
  double factor = 1.0;
  friend bool operator==(const PairProvenance&, const PairProvenance&) = default;
};

/// (y_LR, y) manufactured from an initially restored frame.
struct PseudoPair {
  Image input;   // y_LR
  Image target;  // y
  PairProvenance provenance;
};

/// Frame uniform over the clip, crop origin uniform over valid positions,
/// factor uniform over [scale_min, scale_max];
/// target = modcrop(resize(crop, factor), s), input = resize(target, 1/s).
PseudoPair sample_pair(const VideoClip& restored, const SamplerConfig& cfg, Rng& rng);

/// Pairs from one frame sharing one factor (so they stack into tensors).
/// The first pair consumes draws in the same order as sample_pair.
std::vector<PseudoPair> sample_batch(const VideoClip& restored, const SamplerConfig& cfg, Rng& rng,
                                     int batch_size);

}  // namespace radapt
