#include "radapt/resample.hpp"

#include <algorithm>
#include <cmath>

namespace radapt {

namespace {
constexpr double kKeysA = -0.5;
}

double cubic_kernel(double x) {
  const double t = std::abs(x);
  if (t <= 1.0) return ((kKeysA + 2.0) * t - (kKeysA + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((kKeysA * t - 5.0 * kKeysA) * t + 8.0 * kKeysA) * t - 4.0 * kKeysA;
  return 0.0;
}

Index scaled_extent(Index dim, double scale) {
  detail::require(scale > 0.0 && std::isfinite(scale), "scale must be positive and finite");
  return static_cast<Index>(std::floor(static_cast<double>(dim) * scale + 0.5 + 1e-9));
}

std::vector<ResampleTap> resample_taps(Index in_size, Index out_size, double scale, double origin) {
  detail::require(in_size > 0 && out_size > 0, "resample extents must be positive");
  detail::require(scale > 0.0, "resample scale must be positive");
  const double stretch = scale < 1.0 ? scale : 1.0;  // kernel argument multiplier
  const double support = 2.0 / stretch;
  std::vector<ResampleTap> taps(static_cast<std::size_t>(out_size));
  for (Index dst = 0; dst < out_size; ++dst) {
    const double center = origin + (static_cast<double>(dst) + 0.5) / scale - 0.5;
    const auto first = static_cast<Index>(std::floor(center - support)) + 1;
    const auto last = static_cast<Index>(std::floor(center + support));
    ResampleTap& tap = taps[static_cast<std::size_t>(dst)];
    double total = 0.0;
    for (Index i = first; i <= last; ++i) {
      const double w = cubic_kernel((static_cast<double>(i) - center) * stretch);
      if (w == 0.0) continue;
      tap.index.push_back(std::clamp<Index>(i, 0, in_size - 1));
      tap.weight.push_back(w);
      total += w;
    }
    for (double& w : tap.weight) w /= total;
  }
  return taps;
}

Image resample_axis(const Image& img, Axis axis, Index out_size, double scale, double origin) {
  const bool horizontal = axis == Axis::horizontal;
  const Index in_size = horizontal ? img.width : img.height;
  const auto taps = resample_taps(in_size, out_size, scale, origin);
  Image out(img.channels, horizontal ? img.height : out_size, horizontal ? out_size : img.width);
  for (Index c = 0; c < img.channels; ++c) {
    if (horizontal) {
      for (Index y = 0; y < img.height; ++y) {
        const float* src = img.plane(c) + y * img.width;
        float* dst = out.plane(c) + y * out.width;
        for (Index x = 0; x < out_size; ++x) {
          const auto& tap = taps[static_cast<std::size_t>(x)];
          double acc = 0.0;
          for (std::size_t k = 0; k < tap.index.size(); ++k) acc += tap.weight[k] * src[tap.index[k]];
          dst[x] = static_cast<float>(acc);
        }
      }
    } else {
      std::vector<double> acc(static_cast<std::size_t>(img.width));
      for (Index y = 0; y < out_size; ++y) {
        const auto& tap = taps[static_cast<std::size_t>(y)];
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t k = 0; k < tap.index.size(); ++k) {
          const float* src = img.plane(c) + tap.index[k] * img.width;
          const double w = tap.weight[k];
          for (Index x = 0; x < img.width; ++x) acc[static_cast<std::size_t>(x)] += w * src[x];
        }
        float* dst = out.plane(c) + y * out.width;
        for (Index x = 0; x < img.width; ++x) dst[x] = static_cast<float>(acc[static_cast<std::size_t>(x)]);
      }
    }
  }
  return out;
}

Image resample_region(const Image& img, double origin_y, double origin_x, double scale, Index out_h,
                      Index out_w) {
  detail::require(out_h >= 1 && out_w >= 1, "resampled output dims must be at least 1");
  const Image rows = resample_axis(img, Axis::horizontal, out_w, scale, origin_x);
  return resample_axis(rows, Axis::vertical, out_h, scale, origin_y);
}

Image resize(const Image& img, double scale) {
  detail::require(scale > 0.0 && std::isfinite(scale), "resize scale must be positive");
  const Index h = scaled_extent(img.height, scale);
  const Index w = scaled_extent(img.width, scale);
  detail::require(h >= 1 && w >= 1, "resize output dims would be below 1");
  return resample_region(img, 0.0, 0.0, scale, h, w);
}

Image modcrop(const Image& img, Index s) {
  detail::require(s > 0, "modcrop factor must be positive");
  detail::require(img.height >= s && img.width >= s, "image smaller than modcrop factor");
  const Index h = img.height / s * s;
  const Index w = img.width / s * s;
  if (h == img.height && w == img.width) return img;
  return crop(img, 0, 0, h, w);
}

Image rgb_to_y(const Image& img) {
  detail::require(img.channels == 3, "rgb_to_y requires a 3-channel image");
  Image out(1, img.height, img.width);
  const float* r = img.plane(0);
  const float* g = img.plane(1);
  const float* b = img.plane(2);
  for (Index i = 0; i < img.plane_size(); ++i)
    out.data[i] = static_cast<float>((65.481 * r[i] + 128.553 * g[i] + 24.966 * b[i] + 16.0) / 255.0);
  return out;
}

Image luma(const Image& img) {
  if (img.channels == 1) return img;
  return rgb_to_y(img);
}

}  // namespace radapt
