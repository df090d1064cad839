#pragma once

#include <vector>

#include "radapt/image.hpp"

namespace radapt {

inline constexpr double kPsnrCap = 100.0;

struct FrameScore {
  double psnr_y = 0.0;
  double ssim = 0.0;
};

struct EvalResult {
  double psnr_y = 0.0;  // mean over frames, dB
  double ssim = 0.0;    // mean over frames
  double tof = 0.0;     // mean L1 flow difference, pixels
  std::vector<FrameScore> per_frame;
};

/// PSNR on luma after cropping `border_crop` pixels per side; [0,1] range,
/// capped at 100 dB.
double psnr_y(const Image& ref, const Image& test, int border_crop = 0);

/// Mean windowed SSIM of two single-channel images (11x11 Gaussian,
/// sigma 1.5, K1 0.01, K2 0.03, range 1, valid windows only).
double ssim(const Image& ref, const Image& test);

struct FlowField {
  Index height = 0;
  Index width = 0;
  std::vector<int> u;  // horizontal displacement per pixel
  std::vector<int> v;  // vertical displacement per pixel
};

inline constexpr int kFlowBlock = 8;
inline constexpr int kFlowRadius = 4;

/// Integer block-matching flow from a to b: 8x8 blocks, exhaustive SAD
/// search within radius 4, ties toward smaller |u|+|v| then lexicographic.
FlowField estimate_flow(const Image& a, const Image& b);

/// Mean over consecutive pairs and pixels of |du| + |dv| between the flows
/// of the reference and the test clip (computed on luma).
double tof(const VideoClip& ref, const VideoClip& test);

/// Crop `border` pixels from every side.
Image crop_border(const Image& img, int border);

/// PSNR-Y, SSIM (on luma) and tOF under one protocol: every frame is
/// cropped by `border_crop` before any metric is computed.
EvalResult evaluate_clip(const VideoClip& ref, const VideoClip& test, int border_crop);

}  // namespace radapt
