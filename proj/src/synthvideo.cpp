#include "radapt/synthvideo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "radapt/resample.hpp"

namespace radapt {

SceneSpec SceneSpec::zoom_sweep(std::uint64_t seed, int num_frames, int hr_size, double zoom_start,
                                double zoom_end, Recurrence recurrence, double drift) {
  SceneSpec spec;
  spec.seed = seed;
  spec.hr_size = hr_size;
  spec.recurrence = recurrence;
  for (int t = 0; t < num_frames; ++t) {
    const double a = num_frames > 1 ? static_cast<double>(t) / (num_frames - 1) : 0.0;
    spec.camera_path.push_back({zoom_start * std::pow(zoom_end / zoom_start, a), drift * a, 0.5 * drift * a});
  }
  return spec;
}

SceneSpec SceneSpec::static_scene(std::uint64_t seed, int num_frames, int hr_size) {
  return zoom_sweep(seed, num_frames, hr_size, 1.0, 1.0, Recurrence::high, 0.0);
}

void SceneSpec::validate() const {
  detail::require(scale >= 1, "scene scale must be positive");
  detail::require(hr_size > 0 && hr_size % 4 == 0 && hr_size % scale == 0,
                  "hr_size must be positive and divisible by 4 and the scale");
  detail::require(camera_path.size() >= 2, "a scene needs at least two frames");
  for (const auto& p : camera_path) {
    detail::require(p.zoom > 0.0 && std::isfinite(p.zoom), "zoom factors must be positive");
    detail::require(p.zoom <= kAtlasOversample, "zoom beyond the atlas oversampling factor");
    detail::require(std::isfinite(p.tx) && std::isfinite(p.ty), "translations must be finite");
  }
}

namespace {

using Color = std::array<float, 3>;

Color random_color(Rng& rng) {
  return {static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform())};
}

/// Smooth random field: a coarse random lattice bicubically enlarged.
void add_noise_octave(Image& atlas, Rng& rng, int cell, float amplitude) {
  const int n = atlas.height / cell + 4;
  Image lattice(atlas.channels, n, n);
  for (float& v : lattice.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  const Image up = resample_region(lattice, 1.0, 1.0, static_cast<double>(cell), atlas.height, atlas.width);
  atlas.data += amplitude * up.data;
}

template <typename Inside>
void fill_shape(Image& atlas, double cx, double cy, double radius, const Color& color, Inside inside) {
  const auto y0 = std::max<Index>(0, static_cast<Index>(std::floor(cy - radius)));
  const auto y1 = std::min<Index>(atlas.height - 1, static_cast<Index>(std::ceil(cy + radius)));
  const auto x0 = std::max<Index>(0, static_cast<Index>(std::floor(cx - radius)));
  const auto x1 = std::min<Index>(atlas.width - 1, static_cast<Index>(std::ceil(cx + radius)));
  for (Index y = y0; y <= y1; ++y)
    for (Index x = x0; x <= x1; ++x) {
      const double dx = static_cast<double>(x) + 0.5 - cx;
      const double dy = static_cast<double>(y) + 0.5 - cy;
      if (!inside(dx, dy)) continue;
      for (Index c = 0; c < atlas.channels; ++c) atlas.at(c, y, x) = color[static_cast<std::size_t>(c)];
    }
}

void draw_primitive(Image& atlas, Rng& rng, double max_radius) {
  const double cx = rng.uniform(0.0, static_cast<double>(atlas.width));
  const double cy = rng.uniform(0.0, static_cast<double>(atlas.height));
  const double r = rng.uniform(4.0, max_radius);
  const double angle = rng.uniform(0.0, std::numbers::pi);
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  const Color color = random_color(rng);
  switch (rng.uniform_int(0, 4)) {
    case 0: {  // disk
      fill_shape(atlas, cx, cy, r, color, [r](double dx, double dy) { return dx * dx + dy * dy <= r * r; });
      break;
    }
    case 1: {  // rotated rectangle
      const double hw = r;
      const double hh = r * rng.uniform(0.2, 1.0);
      fill_shape(atlas, cx, cy, std::hypot(hw, hh), color, [=](double dx, double dy) {
        const double u = ca * dx + sa * dy;
        const double v = -sa * dx + ca * dy;
        return std::abs(u) <= hw && std::abs(v) <= hh;
      });
      break;
    }
    case 2: {  // grating of hard stripes inside a disk
      const double period = rng.uniform(3.0, 12.0);
      fill_shape(atlas, cx, cy, r, color, [=](double dx, double dy) {
        const double u = ca * dx + sa * dy;
        return dx * dx + dy * dy <= r * r && std::fmod(std::abs(u), period) < 0.5 * period;
      });
      break;
    }
    case 3: {  // thin line segment
      const double width = rng.uniform(1.0, 3.0);
      fill_shape(atlas, cx, cy, r, color, [=](double dx, double dy) {
        const double u = ca * dx + sa * dy;
        const double v = -sa * dx + ca * dy;
        return std::abs(u) <= r && std::abs(v) <= 0.5 * width;
      });
      break;
    }
    default: {  // ring
      const double inner = r * rng.uniform(0.5, 0.85);
      fill_shape(atlas, cx, cy, r, color, [=](double dx, double dy) {
        const double d2 = dx * dx + dy * dy;
        return d2 <= r * r && d2 >= inner * inner;
      });
      break;
    }
  }
}

Image render_frame(const Image& atlas, const CameraPose& pose, int size) {
  const double scale = pose.zoom / kAtlasOversample;
  const double cx = 0.5 * atlas.width + pose.tx * kAtlasOversample;
  const double cy = 0.5 * atlas.height + pose.ty * kAtlasOversample;
  const double half = 0.5 * size / scale;
  return clamp01(resample_region(atlas, cy - half, cx - half, scale, size, size));
}

int atlas_size_for(const SceneSpec& spec) {
  double min_zoom = std::numeric_limits<double>::infinity();
  double max_shift = 0.0;
  for (const auto& p : spec.camera_path) {
    min_zoom = std::min(min_zoom, p.zoom);
    max_shift = std::max({max_shift, std::abs(p.tx), std::abs(p.ty)});
  }
  const double extent = spec.hr_size * kAtlasOversample / min_zoom + 2.0 * max_shift * kAtlasOversample + 16.0;
  return static_cast<int>(std::ceil(extent / 8.0)) * 8;
}

}  // namespace

Image render_atlas(int size, std::uint64_t seed) {
  detail::require(size >= 16, "atlas too small");
  Rng rng(seed);
  Image atlas(3, size, size);
  const Color base = random_color(rng);
  for (Index c = 0; c < 3; ++c)
    std::fill_n(atlas.plane(c), atlas.plane_size(), 0.25f + 0.5f * base[static_cast<std::size_t>(c)]);
  add_noise_octave(atlas, rng, 64, 0.20f);
  add_noise_octave(atlas, rng, 16, 0.10f);
  add_noise_octave(atlas, rng, 4, 0.05f);
  const int count = std::max(8, size * size / 3000);
  for (int i = 0; i < count; ++i) draw_primitive(atlas, rng, 0.12 * size);
  add_noise_octave(atlas, rng, 2, 0.02f);
  return clamp01(atlas);
}

ClipPair generate_clip(const SceneSpec& spec) {
  spec.validate();
  const int size = atlas_size_for(spec);
  ClipPair pair{{{}, ColorSpace::rgb}, {{}, ColorSpace::rgb}, spec};
  Image shared;
  if (spec.recurrence == Recurrence::high) shared = render_atlas(size, mix_seed(spec.seed, 0));
  for (std::size_t t = 0; t < spec.camera_path.size(); ++t) {
    Image frame = spec.recurrence == Recurrence::high
                      ? render_frame(shared, spec.camera_path[t], spec.hr_size)
                      : render_frame(render_atlas(size, mix_seed(spec.seed, t + 1)), spec.camera_path[t], spec.hr_size);
    pair.lr.frames.push_back(resize(frame, 1.0 / spec.scale));
    pair.hr.frames.push_back(std::move(frame));
  }
  return pair;
}

double recurrence_score(const VideoClip& clip, int num_probes, Rng& rng) {
  detail::require(!clip.empty(), "recurrence_score of an empty clip");
  detail::require(num_probes >= 1, "recurrence_score needs at least one probe");
  constexpr int kPatch = 16;
  constexpr int kStride = 4;
  constexpr double kTau = 0.01;
  constexpr std::array<double, 3> kScales{1.0, 0.9, 0.8};

  std::vector<Image> lum;
  for (const auto& f : clip.frames) lum.push_back(luma(f));
  std::vector<std::vector<Image>> pyramid;
  for (const auto& f : lum) {
    std::vector<Image> levels;
    for (double s : kScales) levels.push_back(s == 1.0 ? f : resize(f, s));
    pyramid.push_back(std::move(levels));
  }

  double total = 0.0;
  for (int p = 0; p < num_probes; ++p) {
    const auto fi = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(lum.size()) - 1));
    const Image& src = lum[fi];
    detail::require(src.height >= kPatch && src.width >= kPatch, "frames smaller than the recurrence probe");
    // Probe origins lie on the candidate grid, so content that recurs
    // unchanged is found exactly.
    const Index py = kStride * rng.uniform_int(0, (src.height - kPatch) / kStride);
    const Index px = kStride * rng.uniform_int(0, (src.width - kPatch) / kStride);
    const Image probe = crop(src, py, px, kPatch, kPatch);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < lum.size(); ++g) {
      if (g == fi && lum.size() > 1) continue;
      for (const Image& cand : pyramid[g]) {
        for (Index y = 0; y + kPatch <= cand.height; y += kStride)
          for (Index x = 0; x + kPatch <= cand.width; x += kStride) {
            double sse = 0.0;
            const double limit = best * kPatch * kPatch;
            for (Index yy = 0; yy < kPatch && sse < limit; ++yy) {
              const float* a = probe.plane(0) + yy * kPatch;
              const float* b = cand.plane(0) + (y + yy) * cand.width + x;
              for (Index xx = 0; xx < kPatch; ++xx) {
                const double d = static_cast<double>(a[xx]) - b[xx];
                sse += d * d;
              }
            }
            best = std::min(best, sse / (kPatch * kPatch));
          }
      }
    }
    total += std::exp(-best / kTau);
  }
  return total / num_probes;
}

}  // namespace radapt
