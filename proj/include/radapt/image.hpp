#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "radapt/tensor.hpp"

namespace radapt {

/// Planar float image (channel, row, column), values nominally in [0, 1].
struct Image {
  Index channels = 0;
  Index height = 0;
  Index width = 0;
  Eigen::ArrayXf data;

  Image() = default;
  Image(Index c, Index h, Index w, float fill = 0.0f)
      : channels(c), height(h), width(w), data(Eigen::ArrayXf::Constant(c * h * w, fill)) {
    detail::require(c > 0 && h > 0 && w > 0, "image dims must be positive");
  }

  Index size() const { return data.size(); }
  Index plane_size() const { return height * width; }

  float& at(Index c, Index y, Index x) { return data[(c * height + y) * width + x]; }
  float at(Index c, Index y, Index x) const { return data[(c * height + y) * width + x]; }

  float* plane(Index c) { return data.data() + c * plane_size(); }
  const float* plane(Index c) const { return data.data() + c * plane_size(); }

  bool same_dims(const Image& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }

  friend bool operator==(const Image& a, const Image& b) {
    return a.same_dims(b) && (a.data == b.data).all();
  }
};

enum class ColorSpace { rgb, luma };

/// Ordered frame sequence; all frames share dims.
struct VideoClip {
  std::vector<Image> frames;
  ColorSpace color = ColorSpace::rgb;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  const Image& operator[](std::size_t i) const { return frames[i]; }
  Image& operator[](std::size_t i) { return frames[i]; }
};

/// Crop [y0, y0+h) x [x0, x0+w).
Image crop(const Image& img, Index y0, Index x0, Index h, Index w);

/// Clamp every sample into [0, 1].
Image clamp01(const Image& img);

/// Round to 8-bit levels and back (value = round(255 v) / 255).
Image quantize8(const Image& img);

/// Stack frames along the channel axis into a (1, sum c, h, w) tensor.
Tensorf stack_channels(std::span<const Image> frames);

/// Images of equal dims -> (n, c, h, w) tensor.
Tensorf to_batch(std::span<const Image> images);
Tensorf to_tensor(const Image& img);

/// Batch entry b of a (n, c, h, w) tensor.
Image from_tensor(const Tensorf& t, Index b = 0);

std::uint64_t checksum(const Image& img, std::uint64_t hash = 0xcbf29ce484222325ULL);
std::uint64_t checksum(const VideoClip& clip);

}  // namespace radapt
