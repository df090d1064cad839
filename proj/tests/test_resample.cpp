#include <doctest.h>

#include "oracles.hpp"
#include "radapt/resample.hpp"

using namespace radapt;
using namespace radapt::testing;

TEST_CASE("cubic kernel at the analytic sample points") {
  CHECK(cubic_kernel(0.0) == 1.0);
  CHECK(cubic_kernel(1.0) == 0.0);
  CHECK(cubic_kernel(2.0) == 0.0);
  CHECK(cubic_kernel(0.5) == 0.5625);
  CHECK(cubic_kernel(1.5) == -0.0625);
  CHECK(cubic_kernel(-0.5) == 0.5625);
  CHECK(cubic_kernel(3.0) == 0.0);
  const double phase_half = cubic_kernel(-1.5) + cubic_kernel(-0.5) + cubic_kernel(0.5) + cubic_kernel(1.5);
  CHECK(phase_half == 1.0);
}

TEST_CASE("cubic kernel weights sum to one at every phase") {
  for (int k = 0; k <= 100; ++k) {
    const double p = k / 100.0;
    const double s = cubic_kernel(p + 1) + cubic_kernel(p) + cubic_kernel(p - 1) + cubic_kernel(p - 2);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("output extent rounds half up") {
  CHECK(scaled_extent(10, 0.25) == 3);  // 2.5 -> 3
  CHECK(scaled_extent(64, 0.8) == 51);  // 51.2
  CHECK(scaled_extent(64, 0.95) == 61);  // 60.8
  CHECK(scaled_extent(6, 0.25) == 2);   // 1.5 -> 2
  CHECK(scaled_extent(16, 4.0) == 64);
  CHECK_THROWS_AS(scaled_extent(4, 0.0), InvalidInput);
  Image tiny(1, 2, 2);
  CHECK_THROWS_AS(resize(tiny, 0.1), InvalidInput);
}

TEST_CASE("resize by 1 is bit-exact identity") {
  Rng rng(1);
  const Image img = random_image(3, 13, 17, rng);
  CHECK(resize(img, 1.0) == img);
}

TEST_CASE("constant images stay constant") {
  for (double s : {0.25, 0.5, 0.8, 0.93, 1.0, 1.17, 2.0, 4.0}) {
    const Image img(3, 21, 18, 0.6f);
    const Image out = resize(img, s);
    CHECK((out.data - 0.6f).abs().maxCoeff() < 1e-6f);
  }
  const Image img(1, 32, 32, 0.3f);
  const Image round_trip = resize(resize(img, 0.25), 4.0);
  CHECK((round_trip.data - 0.3f).abs().maxCoeff() < 1e-6f);
}

TEST_CASE("partition of unity for every tap set") {
  for (double s : {0.25, 0.5, 0.8, 0.95, 1.0, 1.1, 1.2, 4.0}) {
    const Index in = 37;
    for (const auto& tap : resample_taps(in, scaled_extent(in, s), s)) {
      double total = 0.0;
      for (double w : tap.weight) total += w;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
      for (Index i : tap.index) CHECK((i >= 0 && i < in));
    }
  }
}

TEST_CASE("1-D ramp downscale matches dense kernel evaluation") {
  std::vector<double> ramp(16);
  Image img(1, 1, 16);
  for (int i = 0; i < 16; ++i) {
    ramp[static_cast<std::size_t>(i)] = i;
    img.data[i] = static_cast<float>(i);
  }
  for (double s : {0.5, 0.8, 0.3, 1.5, 2.0}) {
    const Index n = scaled_extent(16, s);
    const auto dense = dense_resample_1d(ramp, s, n);
    const Image out = resample_axis(img, Axis::horizontal, n, s);
    for (Index i = 0; i < n; ++i) CHECK(out.data[i] == doctest::Approx(dense[static_cast<std::size_t>(i)]).epsilon(1e-6));
  }
  // Interior of the 0.5 downscale of a ramp is the ramp at the new centres.
  const Image half = resample_axis(img, Axis::horizontal, 8, 0.5);
  CHECK(half.data[3] == doctest::Approx(6.5).epsilon(1e-6));
}

TEST_CASE("separable resize equals either axis order") {
  Rng rng(2);
  const Image img = random_image(2, 24, 30, rng);
  for (double s : {0.8, 0.25, 1.3}) {
    const Index h = scaled_extent(24, s);
    const Index w = scaled_extent(30, s);
    const Image direct = resize(img, s);
    const Image cols_first =
        resample_axis(resample_axis(img, Axis::vertical, h, s), Axis::horizontal, w, s);
    CHECK((direct.data - cols_first.data).abs().maxCoeff() < 1e-5f);
  }
}

TEST_CASE("resample_region with an offset origin shifts the content") {
  Rng rng(3);
  const Image img = random_image(1, 20, 20, rng);
  const Image shifted = resample_region(img, 3.0, 5.0, 1.0, 10, 10);
  CHECK(shifted == crop(img, 3, 5, 10, 10));
}

TEST_CASE("modcrop") {
  Rng rng(4);
  const Image nine = random_image(1, 9, 9, rng);
  const Image eight = modcrop(nine, 4);
  CHECK(eight.height == 8);
  CHECK(eight.width == 8);
  CHECK(eight == crop(nine, 0, 0, 8, 8));
  const Image hundred(3, 100, 100, 0.1f);
  CHECK(modcrop(hundred, 4) == hundred);
  CHECK_THROWS_AS(modcrop(Image(1, 3, 9), 4), InvalidInput);
}

TEST_CASE("BT.601 luma") {
  auto pixel = [](float r, float g, float b) {
    Image p(3, 1, 1);
    p.data << r, g, b;
    return rgb_to_y(p).data[0];
  };
  CHECK(pixel(0, 0, 0) == doctest::Approx(16.0 / 255.0).epsilon(1e-6));
  CHECK(pixel(1, 1, 1) == doctest::Approx(235.0 / 255.0).epsilon(1e-6));
  CHECK(pixel(0, 1, 0) == doctest::Approx((128.553 + 16.0) / 255.0).epsilon(1e-6));
  CHECK_THROWS_AS(rgb_to_y(Image(1, 2, 2)), InvalidInput);

  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const float r1 = static_cast<float>(rng.uniform()), g1 = static_cast<float>(rng.uniform()),
                b1 = static_cast<float>(rng.uniform());
    const float r2 = static_cast<float>(rng.uniform()), g2 = static_cast<float>(rng.uniform()),
                b2 = static_cast<float>(rng.uniform());
    const float a = static_cast<float>(rng.uniform());
    const float mixed = pixel(a * r1 + (1 - a) * r2, a * g1 + (1 - a) * g2, a * b1 + (1 - a) * b2);
    CHECK(mixed == doctest::Approx(a * pixel(r1, g1, b1) + (1 - a) * pixel(r2, g2, b2)).epsilon(1e-6));
    const float y = pixel(r1, g1, b1);
    CHECK((y >= 16.0f / 255.0f - 1e-7f && y <= 235.0f / 255.0f + 1e-7f));
  }
  const Image gray(1, 3, 3, 0.4f);
  CHECK(luma(gray) == gray);
}
