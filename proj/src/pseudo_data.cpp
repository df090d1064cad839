#include "radapt/pseudo_data.hpp"

#include <cmath>
#include <sstream>

#include "radapt/resample.hpp"

namespace radapt {

namespace {

double parse_number(const std::string& s, const std::string& whole) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidInput("bad number in scale mode '" + whole + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw InvalidInput("bad number in scale mode '" + whole + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

void validate_mode(ScaleMode::Kind kind, double lo, double hi) {
  detail::require(lo > 0.0 && lo <= hi, "scale mode bounds must satisfy 0 < lo <= hi");
  switch (kind) {
    case ScaleMode::Kind::none:
      detail::require(lo == 1.0 && hi == 1.0, "scale mode none pins the factor to 1");
      break;
    case ScaleMode::Kind::fixed:
      detail::require(lo == hi, "fixed scale mode needs a single factor");
      break;
    case ScaleMode::Kind::random:
      detail::require(hi <= 1.0, "random downscale bounds must not exceed 1");
      break;
    case ScaleMode::Kind::upscale:
      detail::require(lo > 1.0, "upscale bounds must exceed 1");
      break;
  }
}

}  // namespace

ScaleMode ScaleMode::parse(const std::string& text) {
  const auto parts = split(text, ':');
  ScaleMode m;
  if (parts.size() == 1 && parts[0] == "none") {
    m = none();
  } else if (parts.size() == 2 && parts[0] == "fixed") {
    m = fixed(parse_number(parts[1], text));
  } else if (parts.size() == 3 && (parts[0] == "random" || parts[0] == "upscale")) {
    const double lo = parse_number(parts[1], text);
    const double hi = parse_number(parts[2], text);
    m = parts[0] == "random" ? random(lo, hi) : upscale(lo, hi);
  } else {
    throw InvalidInput("unknown scale mode '" + text + "' (expected none, fixed:F, random:LO:HI, upscale:LO:HI)");
  }
  validate_mode(m.kind, m.lo, m.hi);
  return m;
}

std::string ScaleMode::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::none:
      return "none";
    case Kind::fixed:
      os << "fixed:" << lo;
      break;
    case Kind::random:
      os << "random:" << lo << ":" << hi;
      break;
    case Kind::upscale:
      os << "upscale:" << lo << ":" << hi;
      break;
  }
  return os.str();
}

void SamplerConfig::validate() const {
  detail::require(patch_size_hr >= 1, "patch_size_hr must be positive");
  detail::require(sr_scale >= 1, "sr_scale must be positive");
  validate_mode(mode, scale_min, scale_max);
  detail::require(patch_size_hr * scale_min >= sr_scale, "patch_size_hr * scale_min must be at least sr_scale");
}

SamplerConfig make_scale_mode(const ScaleMode& mode, SamplerConfig base) {
  validate_mode(mode.kind, mode.lo, mode.hi);
  base.mode = mode.kind;
  base.scale_min = mode.lo;
  base.scale_max = mode.hi;
  base.validate();
  return base;
}

namespace {

double draw_factor(const SamplerConfig& cfg, Rng& rng) {
  if (cfg.scale_min == cfg.scale_max) return cfg.scale_min;
  return rng.uniform(cfg.scale_min, cfg.scale_max);
}

CropRect draw_crop(const Image& frame, int side, Rng& rng) {
  return {rng.uniform_int(0, frame.height - side), rng.uniform_int(0, frame.width - side), side, side};
}

PseudoPair build_pair(const Image& frame, std::size_t frame_index, const CropRect& rect, double factor,
                      const SamplerConfig& cfg) {
  const Image patch = crop(frame, rect.y, rect.x, rect.height, rect.width);
  Image target = modcrop(factor == 1.0 ? patch : resize(patch, factor), cfg.sr_scale);
  Image input = resize(target, 1.0 / cfg.sr_scale);
  return {std::move(input), std::move(target), {frame_index, rect, factor}};
}

void check_pool(const VideoClip& restored, const SamplerConfig& cfg) {
  cfg.validate();
  detail::require(!restored.empty(), "pseudo-data pool is empty");
  for (const auto& f : restored.frames)
    detail::require(f.height >= cfg.patch_size_hr && f.width >= cfg.patch_size_hr,
                    "restored frame smaller than patch_size_hr");
}

}  // namespace

PseudoPair sample_pair(const VideoClip& restored, const SamplerConfig& cfg, Rng& rng) {
  return sample_batch(restored, cfg, rng, 1).front();
}

std::vector<PseudoPair> sample_batch(const VideoClip& restored, const SamplerConfig& cfg, Rng& rng,
                                     int batch_size) {
  check_pool(restored, cfg);
  detail::require(batch_size >= 1, "batch_size must be positive");
  const auto t = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(restored.size()) - 1));
  const Image& frame = restored[t];
  std::vector<CropRect> rects{draw_crop(frame, cfg.patch_size_hr, rng)};
  const double factor = draw_factor(cfg, rng);
  for (int i = 1; i < batch_size; ++i) rects.push_back(draw_crop(frame, cfg.patch_size_hr, rng));
  std::vector<PseudoPair> batch;
  batch.reserve(rects.size());
  for (const auto& r : rects) batch.push_back(build_pair(frame, t, r, factor, cfg));
  return batch;
}

}  // namespace radapt
