#include "radapt/image.hpp"

#include <cmath>

namespace radapt {

Image crop(const Image& img, Index y0, Index x0, Index h, Index w) {
  detail::require(y0 >= 0 && x0 >= 0 && h > 0 && w > 0 && y0 + h <= img.height && x0 + w <= img.width,
                  "crop window outside image");
  Image out(img.channels, h, w);
  for (Index c = 0; c < img.channels; ++c)
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) out.at(c, y, x) = img.at(c, y0 + y, x0 + x);
  return out;
}

Image clamp01(const Image& img) {
  Image out = img;
  out.data = out.data.max(0.0f).min(1.0f);
  return out;
}

Image quantize8(const Image& img) {
  Image out = img;
  out.data = (img.data.max(0.0f).min(1.0f) * 255.0f).round() / 255.0f;
  return out;
}

Tensorf stack_channels(std::span<const Image> frames) {
  detail::require(!frames.empty(), "stack_channels of empty frame list");
  const Image& first = frames.front();
  Index total = 0;
  for (const auto& f : frames) {
    detail::require(f.height == first.height && f.width == first.width, "frames differ in size");
    total += f.channels;
  }
  Tensorf out(Shape{1, total, first.height, first.width});
  Index offset = 0;
  for (const auto& f : frames) {
    std::copy_n(f.data.data(), f.size(), out.data() + offset);
    offset += f.size();
  }
  return out;
}

Tensorf to_batch(std::span<const Image> images) {
  detail::require(!images.empty(), "to_batch of empty image list");
  const Image& first = images.front();
  Tensorf out(Shape{static_cast<Index>(images.size()), first.channels, first.height, first.width});
  Index offset = 0;
  for (const auto& img : images) {
    detail::require(img.same_dims(first), "batch images differ in size");
    std::copy_n(img.data.data(), img.size(), out.data() + offset);
    offset += img.size();
  }
  return out;
}

Tensorf to_tensor(const Image& img) { return to_batch(std::span<const Image>(&img, 1)); }

Image from_tensor(const Tensorf& t, Index b) {
  const Shape& s = t.shape();
  detail::require(b >= 0 && b < s.batch, "batch index out of range");
  Image out(s.channels, s.height, s.width);
  std::copy_n(t.plane(b, 0), out.size(), out.data.data());
  return out;
}

std::uint64_t checksum(const Image& img, std::uint64_t hash) {
  const Index dims[3] = {img.channels, img.height, img.width};
  hash = fnv1a64(dims, sizeof(dims), hash);
  return fnv1a64(img.data.data(), static_cast<std::size_t>(img.size()) * sizeof(float), hash);
}

std::uint64_t checksum(const VideoClip& clip) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& f : clip.frames) h = checksum(f, h);
  return h;
}

}  // namespace radapt
