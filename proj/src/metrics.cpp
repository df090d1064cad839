#include "radapt/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "radapt/resample.hpp"

namespace radapt {

Image crop_border(const Image& img, int border) {
  detail::require(border >= 0, "border crop must be non-negative");
  if (border == 0) return img;
  detail::require(2 * border < img.height && 2 * border < img.width, "border crop must be below half the image");
  return crop(img, border, border, img.height - 2 * border, img.width - 2 * border);
}

double psnr_y(const Image& ref, const Image& test, int border_crop) {
  detail::require(ref.same_dims(test), "psnr_y dimension mismatch");
  const Image a = crop_border(luma(ref), border_crop);
  const Image b = crop_border(luma(test), border_crop);
  const double m = (a.data.cast<double>() - b.data.cast<double>()).square().mean();
  if (m <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

std::array<double, kSsimWindow> gaussian_window() {
  std::array<double, kSsimWindow> w{};
  double total = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    total += w[static_cast<std::size_t>(i)];
  }
  for (double& v : w) v /= total;
  return w;
}

/// Separable valid-mode filtering of a double plane.
Eigen::ArrayXXd filter_valid(const Eigen::ArrayXXd& x, const std::array<double, kSsimWindow>& w) {
  const Index oh = x.rows() - kSsimWindow + 1;
  const Index ow = x.cols() - kSsimWindow + 1;
  Eigen::ArrayXXd rows = Eigen::ArrayXXd::Zero(x.rows(), ow);
  for (int k = 0; k < kSsimWindow; ++k) rows += w[static_cast<std::size_t>(k)] * x.middleCols(k, ow);
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(oh, ow);
  for (int k = 0; k < kSsimWindow; ++k) out += w[static_cast<std::size_t>(k)] * rows.middleRows(k, oh);
  return out;
}

Eigen::ArrayXXd as_plane(const Image& img) {
  Eigen::ArrayXXd p(img.height, img.width);
  for (Index y = 0; y < img.height; ++y)
    for (Index x = 0; x < img.width; ++x) p(y, x) = img.at(0, y, x);
  return p;
}

}  // namespace

double ssim(const Image& ref, const Image& test) {
  detail::require(ref.same_dims(test), "ssim dimension mismatch");
  detail::require(ref.channels == 1, "ssim expects single-channel (luma) images");
  detail::require(ref.height >= kSsimWindow && ref.width >= kSsimWindow, "ssim needs images of at least 11x11");
  if (ref == test) return 1.0;
  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  const auto w = gaussian_window();
  const Eigen::ArrayXXd a = as_plane(ref);
  const Eigen::ArrayXXd b = as_plane(test);
  const Eigen::ArrayXXd mu_a = filter_valid(a, w);
  const Eigen::ArrayXXd mu_b = filter_valid(b, w);
  const Eigen::ArrayXXd var_a = filter_valid(a * a, w) - mu_a.square();
  const Eigen::ArrayXXd var_b = filter_valid(b * b, w) - mu_b.square();
  const Eigen::ArrayXXd cov = filter_valid(a * b, w) - mu_a * mu_b;
  const Eigen::ArrayXXd map = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                              ((mu_a.square() + mu_b.square() + c1) * (var_a + var_b + c2));
  return map.mean();
}

FlowField estimate_flow(const Image& a, const Image& b) {
  detail::require(a.same_dims(b), "estimate_flow dimension mismatch");
  detail::require(a.channels == 1, "estimate_flow expects single-channel (luma) images");
  FlowField flow{a.height, a.width, std::vector<int>(static_cast<std::size_t>(a.plane_size())),
                 std::vector<int>(static_cast<std::size_t>(a.plane_size()))};
  // Candidate order encodes the tie-break: ascending |u|+|v|, then (u, v).
  std::vector<std::pair<int, int>> candidates;
  for (int u = -kFlowRadius; u <= kFlowRadius; ++u)
    for (int v = -kFlowRadius; v <= kFlowRadius; ++v) candidates.emplace_back(u, v);
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& p, const auto& q) {
    const int dp = std::abs(p.first) + std::abs(p.second);
    const int dq = std::abs(q.first) + std::abs(q.second);
    return dp != dq ? dp < dq : p < q;
  });
  for (Index by = 0; by < a.height; by += kFlowBlock) {
    for (Index bx = 0; bx < a.width; bx += kFlowBlock) {
      const Index bh = std::min<Index>(kFlowBlock, a.height - by);
      const Index bw = std::min<Index>(kFlowBlock, a.width - bx);
      double best = std::numeric_limits<double>::infinity();
      std::pair<int, int> best_uv{0, 0};
      for (const auto& [u, v] : candidates) {
        if (by + v < 0 || bx + u < 0 || by + v + bh > b.height || bx + u + bw > b.width) continue;
        double sad = 0.0;
        for (Index y = 0; y < bh && sad < best; ++y)
          for (Index x = 0; x < bw; ++x)
            sad += std::abs(static_cast<double>(a.at(0, by + y, bx + x)) - b.at(0, by + y + v, bx + x + u));
        if (sad < best) {
          best = sad;
          best_uv = {u, v};
        }
      }
      for (Index y = by; y < by + bh; ++y)
        for (Index x = bx; x < bx + bw; ++x) {
          const auto i = static_cast<std::size_t>(y * a.width + x);
          flow.u[i] = best_uv.first;
          flow.v[i] = best_uv.second;
        }
    }
  }
  return flow;
}

double tof(const VideoClip& ref, const VideoClip& test) {
  detail::require(ref.size() == test.size(), "tof frame count mismatch");
  detail::require(ref.size() >= 2, "tof needs at least two frames");
  double total = 0.0;
  double count = 0.0;
  for (std::size_t t = 0; t + 1 < ref.size(); ++t) {
    detail::require(ref[t].same_dims(test[t]) && ref[t + 1].same_dims(test[t + 1]), "tof frame dims mismatch");
    const FlowField fr = estimate_flow(luma(ref[t]), luma(ref[t + 1]));
    const FlowField ft = estimate_flow(luma(test[t]), luma(test[t + 1]));
    for (std::size_t i = 0; i < fr.u.size(); ++i)
      total += std::abs(fr.u[i] - ft.u[i]) + std::abs(fr.v[i] - ft.v[i]);
    count += static_cast<double>(fr.u.size());
  }
  return total / count;
}

EvalResult evaluate_clip(const VideoClip& ref, const VideoClip& test, int border_crop) {
  detail::require(ref.size() == test.size(), "evaluation frame count mismatch");
  detail::require(!ref.empty(), "evaluation of an empty clip");
  EvalResult r;
  VideoClip ref_y{{}, ColorSpace::luma}, test_y{{}, ColorSpace::luma};
  for (std::size_t t = 0; t < ref.size(); ++t) {
    detail::require(ref[t].same_dims(test[t]), "evaluation frame dims mismatch");
    ref_y.frames.push_back(crop_border(luma(ref[t]), border_crop));
    test_y.frames.push_back(crop_border(luma(test[t]), border_crop));
    const FrameScore s{psnr_y(ref_y.frames.back(), test_y.frames.back(), 0),
                       ssim(ref_y.frames.back(), test_y.frames.back())};
    r.per_frame.push_back(s);
    r.psnr_y += s.psnr_y;
    r.ssim += s.ssim;
  }
  r.psnr_y /= static_cast<double>(ref.size());
  r.ssim /= static_cast<double>(ref.size());
  r.tof = ref.size() >= 2 ? tof(ref_y, test_y) : 0.0;
  return r;
}

}  // namespace radapt
