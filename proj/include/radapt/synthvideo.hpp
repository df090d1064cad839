#pragma once

#include <cstdint>
#include <vector>

#include "radapt/image.hpp"
#include "radapt/random.hpp"

namespace radapt {

enum class Recurrence { high, low };

struct CameraPose {
  double zoom = 1.0;  // magnification relative to the base view
  double tx = 0.0;    // translation of the view centre, in frame pixels at zoom 1
  double ty = 0.0;
  friend bool operator==(const CameraPose&, const CameraPose&) = default;
};

/// Scene description; together with the seed it determines a clip exactly.
struct SceneSpec {
  std::uint64_t seed = 0;
  int hr_size = 256;
  int scale = 4;
  Recurrence recurrence = Recurrence::high;
  std::vector<CameraPose> camera_path;

  int num_frames() const { return static_cast<int>(camera_path.size()); }

  /// Geometric zoom from zoom_start to zoom_end with a slow diagonal drift.
  static SceneSpec zoom_sweep(std::uint64_t seed, int num_frames, int hr_size, double zoom_start = 1.0,
                              double zoom_end = 1.6, Recurrence recurrence = Recurrence::high, double drift = 0.0);

  /// Camera fixed at zoom 1.
  static SceneSpec static_scene(std::uint64_t seed, int num_frames, int hr_size);

  void validate() const;
};

struct ClipPair {
  VideoClip hr;
  VideoClip lr;
  SceneSpec spec;
};

/// Atlas pixels per frame pixel at zoom 1 (frames are always rendered by
/// downscaling the atlas while zoom <= kAtlasOversample).
inline constexpr double kAtlasOversample = 2.0;

/// Procedural RGB texture: band-limited noise plus hard-edged shapes.
Image render_atlas(int size, std::uint64_t seed);

/// Render every camera pose from the atlas (one shared atlas for high
/// recurrence, a fresh atlas per frame for low) and derive LR = resize(hr, 1/s).
ClipPair generate_clip(const SceneSpec& spec);

/// Mean over probes of exp(-d / 0.01), with d the smallest MSE between a
/// random 16x16 luma probe (origin on the stride-4 grid) and any stride-4
/// patch of another frame rescaled by 1.0, 0.9 or 0.8.
double recurrence_score(const VideoClip& clip, int num_probes, Rng& rng);

}  // namespace radapt
