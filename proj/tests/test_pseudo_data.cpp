#include <doctest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "radapt/pseudo_data.hpp"
#include "radapt/resample.hpp"

using namespace radapt;
using namespace radapt::testing;

namespace {

VideoClip random_pool(int frames, Index side, std::uint64_t seed) {
  Rng rng(seed);
  VideoClip clip{{}, ColorSpace::rgb};
  for (int t = 0; t < frames; ++t) clip.frames.push_back(random_image(3, side, side, rng));
  return clip;
}

}  // namespace

TEST_CASE("scale mode parsing") {
  CHECK(ScaleMode::parse("none") == ScaleMode::none());
  CHECK(ScaleMode::parse("fixed:0.95") == ScaleMode::fixed(0.95));
  CHECK(ScaleMode::parse("random:0.8:0.95") == ScaleMode::random(0.8, 0.95));
  CHECK(ScaleMode::parse("upscale:1.05:1.2") == ScaleMode::upscale(1.05, 1.2));
  CHECK(ScaleMode::parse(ScaleMode::random(0.8, 0.95).to_string()) == ScaleMode::random(0.8, 0.95));
  for (const char* bad : {"", "random", "random:0.9:0.8", "random:0.8:1.2", "upscale:0.9:1.1", "fixed:abc",
                          "fixed:0", "bogus:1", "none:1", "random:0.8:0.95:1", "fixed:-1"})
    CHECK_THROWS_AS(ScaleMode::parse(bad), InvalidInput);
}

TEST_CASE("sampler config validation") {
  SamplerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.patch_size_hr = 4;  // 4 * 0.8 < 4
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  CHECK_THROWS_AS(make_scale_mode(ScaleMode{ScaleMode::Kind::random, 0.9, 0.8}), InvalidInput);
  CHECK_THROWS_AS(make_scale_mode(ScaleMode{ScaleMode::Kind::upscale, 0.9, 1.2}), InvalidInput);
}

TEST_CASE("pairs are self-consistent with divisible targets") {
  const VideoClip pool = random_pool(3, 80, 1);
  for (const auto& mode : {ScaleMode::none(), ScaleMode::fixed(0.95), ScaleMode::random(0.8, 0.95),
                           ScaleMode::upscale(1.05, 1.2)}) {
    const SamplerConfig cfg = make_scale_mode(mode);
    Rng rng(2);
    for (int k = 0; k < 25; ++k) {
      const PseudoPair p = sample_pair(pool, cfg, rng);
      CHECK(p.target.height % cfg.sr_scale == 0);
      CHECK(p.target.width % cfg.sr_scale == 0);
      CHECK(p.target.height == cfg.sr_scale * p.input.height);
      CHECK(p.target.width == cfg.sr_scale * p.input.width);
      CHECK(resize(p.target, 1.0 / cfg.sr_scale) == p.input);
      CHECK((p.provenance.factor >= cfg.scale_min && p.provenance.factor <= cfg.scale_max));
      const CropRect& r = p.provenance.crop;
      CHECK((r.y >= 0 && r.x >= 0 && r.y + r.height <= 80 && r.x + r.width <= 80));
      CHECK(r.height == cfg.patch_size_hr);
      const Image patch = crop(pool[p.provenance.frame_index], r.y, r.x, r.height, r.width);
      CHECK(modcrop(p.provenance.factor == 1.0 ? patch : resize(patch, p.provenance.factor), 4) == p.target);
    }
  }
}

TEST_CASE("mode-specific factors") {
  const VideoClip pool = random_pool(2, 72, 3);
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    CHECK(sample_pair(pool, make_scale_mode(ScaleMode::none()), rng).provenance.factor == 1.0);
    CHECK(sample_pair(pool, make_scale_mode(ScaleMode::fixed(0.95)), rng).provenance.factor == 0.95);
    const double up = sample_pair(pool, make_scale_mode(ScaleMode::upscale(1.05, 1.2)), rng).provenance.factor;
    CHECK((up >= 1.05 && up <= 1.2));
  }
}

TEST_CASE("unit factor with divisible patch yields the raw crop") {
  const VideoClip pool = random_pool(2, 70, 5);
  SamplerConfig cfg;
  cfg.patch_size_hr = 32;
  cfg = make_scale_mode(ScaleMode::none(), cfg);
  Rng rng(6);
  const PseudoPair p = sample_pair(pool, cfg, rng);
  const CropRect& r = p.provenance.crop;
  const Image raw = crop(pool[p.provenance.frame_index], r.y, r.x, 32, 32);
  CHECK(p.target == raw);
  CHECK(p.input == resize(raw, 0.25));
}

TEST_CASE("sampling is deterministic per seed and differs across seeds") {
  const VideoClip pool = random_pool(4, 70, 7);
  const SamplerConfig cfg;
  Rng a(8), b(8), c(9);
  const auto pa = sample_batch(pool, cfg, a, 3);
  const auto pb = sample_batch(pool, cfg, b, 3);
  const auto pc = sample_batch(pool, cfg, c, 3);
  bool differs = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].provenance == pb[i].provenance);
    CHECK(pa[i].target == pb[i].target);
    differs = differs || !(pa[i].provenance == pc[i].provenance);
  }
  CHECK(differs);
}

TEST_CASE("batches share frame and factor, and batch size 1 equals sample_pair") {
  const VideoClip pool = random_pool(5, 70, 10);
  const SamplerConfig cfg;
  Rng r1(11), r2(11);
  const PseudoPair single = sample_pair(pool, cfg, r1);
  const auto batch = sample_batch(pool, cfg, r2, 1);
  REQUIRE(batch.size() == 1);
  CHECK(batch[0].provenance == single.provenance);
  CHECK(batch[0].input == single.input);
  CHECK(r1.next() == r2.next());

  Rng rng(12);
  for (int k = 0; k < 10; ++k) {
    const auto pairs = sample_batch(pool, cfg, rng, 6);
    CHECK(pairs.size() == 6);
    for (const auto& p : pairs) {
      CHECK(p.provenance.frame_index == pairs[0].provenance.frame_index);
      CHECK(p.provenance.factor == pairs[0].provenance.factor);
      CHECK(p.target.same_dims(pairs[0].target));
      CHECK(p.input.same_dims(pairs[0].input));
    }
  }
}

TEST_CASE("errors: small frames, empty pool, bad batch size") {
  const VideoClip small = random_pool(2, 40, 13);
  Rng rng(14);
  CHECK_THROWS_AS(sample_pair(small, SamplerConfig{}, rng), InvalidInput);
  CHECK_THROWS_AS(sample_pair(VideoClip{}, SamplerConfig{}, rng), InvalidInput);
  CHECK_THROWS_AS(sample_batch(random_pool(1, 64, 1), SamplerConfig{}, rng, 0), InvalidInput);
}

TEST_CASE("10k draws: factor range and uniform frame, crop and factor histograms") {
  // The statistics only need provenance, so small frames and patches keep
  // the image work negligible.
  VideoClip pool = random_pool(8, 24, 15);
  SamplerConfig cfg;
  cfg.patch_size_hr = 8;
  cfg.validate();
  Rng rng(16);
  constexpr int kDraws = 10000;
  std::vector<int> frames(8), crops_y(17), factors(10);
  double lo = 1.0, hi = 0.0;
  for (int k = 0; k < kDraws; ++k) {
    const PseudoPair p = sample_pair(pool, cfg, rng);
    ++frames[p.provenance.frame_index];
    ++crops_y[static_cast<std::size_t>(p.provenance.crop.y)];
    const double f = p.provenance.factor;
    lo = std::min(lo, f);
    hi = std::max(hi, f);
    const auto bin = static_cast<std::size_t>(std::min(9.0, (f - 0.8) / 0.15 * 10.0));
    ++factors[bin];
  }
  CHECK(lo >= 0.8);
  CHECK(hi <= 0.95);
  CHECK(lo < 0.805);
  CHECK(hi > 0.945);

  // Multinomial 3-sigma band per frame bin.
  const double p = 1.0 / 8.0;
  const double sigma = std::sqrt(kDraws * p * (1 - p));
  for (int c : frames) CHECK(std::abs(c - kDraws * p) < 3.0 * sigma);

  CHECK(chi_square_p_value(chi_square_uniform(frames), 7) > 0.01);
  CHECK(chi_square_p_value(chi_square_uniform(crops_y), 16) > 0.01);
  CHECK(chi_square_p_value(chi_square_uniform(factors), 9) > 0.01);
}
