#pragma once

#include <vector>

#include "radapt/image.hpp"

namespace radapt {

/// Keys cubic convolution kernel with a = -0.5.
double cubic_kernel(double x);

/// Output extent round-half-up(dim * scale).
Index scaled_extent(Index dim, double scale);

/// Sparse 1-D resampling weights for one output sample.
struct ResampleTap {
  std::vector<Index> index;   // clamped source indices
  std::vector<double> weight;  // normalized to sum 1
};

/// Weights mapping `in_size` source samples to `out_size` output samples with
/// src = origin + (dst + 0.5) / scale - 0.5. When scale < 1 the kernel is
/// stretched by 1/scale (anti-aliasing). Every tap set is renormalized.
std::vector<ResampleTap> resample_taps(Index in_size, Index out_size, double scale, double origin = 0.0);

enum class Axis { horizontal, vertical };

/// Resample along one axis only.
Image resample_axis(const Image& img, Axis axis, Index out_size, double scale, double origin = 0.0);

/// Separable bicubic resampling of the window whose top-left source
/// coordinate is (origin_y, origin_x) into an out_h x out_w image.
Image resample_region(const Image& img, double origin_y, double origin_x, double scale, Index out_h,
                      Index out_w);

/// Bicubic resize with output dims round(dim * scale).
Image resize(const Image& img, double scale);

/// Crop to multiples of s, anchored top-left.
Image modcrop(const Image& img, Index s);

/// BT.601 studio-swing luma of a 3-channel image in [0, 1].
Image rgb_to_y(const Image& img);

/// Luma if 3-channel, unchanged if already single channel.
Image luma(const Image& img);

}  // namespace radapt
