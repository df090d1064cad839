#pragma once

// Forward and adjoint kernels shared by the autodiff graph. All kernels are
// single threaded with a fixed reduction order, so results are bit-stable.

#include <Eigen/Core>

#include <algorithm>

#include "radapt/tensor.hpp"

namespace radapt {

struct ConvGeometry {
  Index batch, in_channels, height, width;
  Index out_channels, kernel_h, kernel_w;
  Index stride, padding;
  Index out_h, out_w;

  Index patch_size() const { return in_channels * kernel_h * kernel_w; }
  Index columns() const { return batch * out_h * out_w; }
};

template <typename Scalar>
ConvGeometry conv_geometry(const Shape& input, const Shape& weight, Index stride, Index padding) {
  detail::require(stride > 0, "conv2d stride must be positive");
  detail::require(padding >= 0, "conv2d padding must be non-negative");
  detail::require(input.channels == weight.channels,
                  "conv2d input channels " + std::to_string(input.channels) +
                      " do not match weight in_c " + std::to_string(weight.channels));
  ConvGeometry g{input.batch, input.channels, input.height, input.width,
                 weight.batch, weight.height, weight.width, stride, padding, 0, 0};
  const Index span_h = input.height + 2 * padding - weight.height;
  const Index span_w = input.width + 2 * padding - weight.width;
  detail::require(span_h >= 0 && span_w >= 0 && weight.height > 0 && weight.width > 0,
                  "conv2d output spatial dims would be non-positive");
  g.out_h = span_h / stride + 1;
  g.out_w = span_w / stride + 1;
  return g;
}

/// Output columns [lo, hi) whose input column ox*stride - padding + k is in range.
inline std::pair<Index, Index> valid_span(Index k, Index stride, Index padding, Index in_size, Index out_size) {
  // ox * stride >= padding - k  and  ox * stride <= in_size - 1 + padding - k
  const Index lo_num = padding - k;
  Index lo = lo_num <= 0 ? 0 : (lo_num + stride - 1) / stride;
  const Index hi_num = in_size - 1 + padding - k;
  Index hi = hi_num < 0 ? 0 : hi_num / stride + 1;
  lo = std::min(lo, out_size);
  hi = std::clamp(hi, lo, out_size);
  return {lo, hi};
}

/// Unfold receptive fields into a (C*kh*kw) x (B*oh*ow) row-major matrix.
template <typename Scalar>
typename Tensor<Scalar>::RowMatrix im2col(const Tensor<Scalar>& input, const ConvGeometry& g) {
  typename Tensor<Scalar>::RowMatrix cols(g.patch_size(), g.columns());
  const Index plane = g.out_h * g.out_w;
  for (Index c = 0; c < g.in_channels; ++c) {
    for (Index ky = 0; ky < g.kernel_h; ++ky) {
      for (Index kx = 0; kx < g.kernel_w; ++kx) {
        Scalar* row = cols.row((c * g.kernel_h + ky) * g.kernel_w + kx).data();
        const auto [lo, hi] = valid_span(kx, g.stride, g.padding, g.width, g.out_w);
        for (Index b = 0; b < g.batch; ++b) {
          const Scalar* src = input.plane(b, c);
          for (Index oy = 0; oy < g.out_h; ++oy) {
            Scalar* dst = row + b * plane + oy * g.out_w;
            const Index iy = oy * g.stride - g.padding + ky;
            if (iy < 0 || iy >= g.height) {
              std::fill(dst, dst + g.out_w, Scalar(0));
              continue;
            }
            const Scalar* line = src + iy * g.width - g.padding + kx;
            std::fill(dst, dst + lo, Scalar(0));
            if (g.stride == 1) {
              std::copy(line + lo, line + hi, dst + lo);
            } else {
              for (Index ox = lo; ox < hi; ++ox) dst[ox] = line[ox * g.stride];
            }
            std::fill(dst + hi, dst + g.out_w, Scalar(0));
          }
        }
      }
    }
  }
  return cols;
}

/// Adjoint of im2col: scatter-add columns back onto the input grid.
template <typename Scalar>
void col2im_add(const typename Tensor<Scalar>::RowMatrix& cols, const ConvGeometry& g,
                Tensor<Scalar>& input_grad) {
  const Index plane = g.out_h * g.out_w;
  for (Index c = 0; c < g.in_channels; ++c) {
    for (Index ky = 0; ky < g.kernel_h; ++ky) {
      for (Index kx = 0; kx < g.kernel_w; ++kx) {
        const Scalar* row = cols.row((c * g.kernel_h + ky) * g.kernel_w + kx).data();
        const auto [lo, hi] = valid_span(kx, g.stride, g.padding, g.width, g.out_w);
        for (Index b = 0; b < g.batch; ++b) {
          Scalar* dst = input_grad.plane(b, c);
          for (Index oy = 0; oy < g.out_h; ++oy) {
            const Index iy = oy * g.stride - g.padding + ky;
            if (iy < 0 || iy >= g.height) continue;
            const Scalar* src = row + b * plane + oy * g.out_w;
            Scalar* line = dst + iy * g.width - g.padding + kx;
            if (g.stride == 1) {
              for (Index ox = lo; ox < hi; ++ox) line[ox] += src[ox];
            } else {
              for (Index ox = lo; ox < hi; ++ox) line[ox * g.stride] += src[ox];
            }
          }
        }
      }
    }
  }
}

/// (Co x B*P) row-major result matrix -> (B, Co, oh, ow) tensor.
template <typename Scalar>
Tensor<Scalar> columns_to_tensor(const typename Tensor<Scalar>::RowMatrix& m, const ConvGeometry& g) {
  Tensor<Scalar> out(Shape{g.batch, g.out_channels, g.out_h, g.out_w});
  const Index plane = g.out_h * g.out_w;
  for (Index b = 0; b < g.batch; ++b)
    for (Index co = 0; co < g.out_channels; ++co)
      std::copy_n(m.row(co).data() + b * plane, plane, out.plane(b, co));
  return out;
}

template <typename Scalar>
typename Tensor<Scalar>::RowMatrix tensor_to_columns(const Tensor<Scalar>& t) {
  const Shape& s = t.shape();
  const Index plane = s.plane();
  typename Tensor<Scalar>::RowMatrix m(s.channels, s.batch * plane);
  for (Index b = 0; b < s.batch; ++b)
    for (Index c = 0; c < s.channels; ++c)
      std::copy_n(t.plane(b, c), plane, m.row(c).data() + b * plane);
  return m;
}

/// Receptive fields of output rows [oy0, oy1) of batch item b, as a
/// (C*kh*kw) x ((oy1-oy0)*ow) row-major matrix.
template <typename Scalar>
void im2col_rows(const Tensor<Scalar>& input, const ConvGeometry& g, Index b, Index oy0, Index oy1,
                 typename Tensor<Scalar>::RowMatrix& cols) {
  cols.resize(g.patch_size(), (oy1 - oy0) * g.out_w);
  for (Index c = 0; c < g.in_channels; ++c) {
    const Scalar* src = input.plane(b, c);
    for (Index ky = 0; ky < g.kernel_h; ++ky) {
      for (Index kx = 0; kx < g.kernel_w; ++kx) {
        Scalar* row = cols.row((c * g.kernel_h + ky) * g.kernel_w + kx).data();
        const auto [lo, hi] = valid_span(kx, g.stride, g.padding, g.width, g.out_w);
        for (Index oy = oy0; oy < oy1; ++oy) {
          Scalar* dst = row + (oy - oy0) * g.out_w;
          const Index iy = oy * g.stride - g.padding + ky;
          if (iy < 0 || iy >= g.height) {
            std::fill(dst, dst + g.out_w, Scalar(0));
            continue;
          }
          const Scalar* line = src + iy * g.width - g.padding + kx;
          std::fill(dst, dst + lo, Scalar(0));
          for (Index ox = lo; ox < hi; ++ox) dst[ox] = line[ox * g.stride];
          std::fill(dst + hi, dst + g.out_w, Scalar(0));
        }
      }
    }
  }
}

/// Cross-correlation with zero padding. Bias has shape (1, out_c, 1, 1).
/// Works in strips of output rows so the unfolded patch matrix stays in cache.
template <typename Scalar>
Tensor<Scalar> conv2d(const Tensor<Scalar>& input, const Tensor<Scalar>& weight,
                      const Tensor<Scalar>& bias, Index stride, Index padding) {
  const ConvGeometry g = conv_geometry<Scalar>(input.shape(), weight.shape(), stride, padding);
  detail::require(bias.size() == g.out_channels, "conv2d bias length must equal out_c");
  constexpr Index kStripColumns = 512;
  const Index strip = std::max<Index>(1, kStripColumns / g.out_w);
  const auto w = weight.matrix(g.out_channels, g.patch_size());
  const Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> bvec(bias.data(), g.out_channels);
  Tensor<Scalar> out(Shape{g.batch, g.out_channels, g.out_h, g.out_w});
  typename Tensor<Scalar>::RowMatrix cols, res;
  for (Index b = 0; b < g.batch; ++b) {
    for (Index oy0 = 0; oy0 < g.out_h; oy0 += strip) {
      const Index oy1 = std::min(g.out_h, oy0 + strip);
      im2col_rows(input, g, b, oy0, oy1, cols);
      res.noalias() = w * cols;
      res.colwise() += bvec;
      const Index n = (oy1 - oy0) * g.out_w;
      for (Index co = 0; co < g.out_channels; ++co)
        std::copy_n(res.row(co).data(), n, out.plane(b, co) + oy0 * g.out_w);
    }
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& input) {
  return Tensor<Scalar>(input.shape(), input.array().max(Scalar(0)));
}

/// (b, c*r*r, h, w) -> (b, c, r*h, r*w); out(c, r*y+dy, r*x+dx) = in(c*r*r + dy*r + dx, y, x).
template <typename Scalar>
Tensor<Scalar> pixel_shuffle(const Tensor<Scalar>& input, Index r) {
  const Shape& s = input.shape();
  detail::require(r > 0, "pixel_shuffle factor must be positive");
  detail::require(s.channels % (r * r) == 0,
                  "pixel_shuffle channel count " + std::to_string(s.channels) +
                      " not divisible by r^2 = " + std::to_string(r * r));
  const Index oc = s.channels / (r * r);
  Tensor<Scalar> out(Shape{s.batch, oc, s.height * r, s.width * r});
  for (Index b = 0; b < s.batch; ++b)
    for (Index c = 0; c < oc; ++c)
      for (Index dy = 0; dy < r; ++dy)
        for (Index dx = 0; dx < r; ++dx) {
          const Scalar* src = input.plane(b, c * r * r + dy * r + dx);
          for (Index y = 0; y < s.height; ++y)
            for (Index x = 0; x < s.width; ++x)
              out(b, c, r * y + dy, r * x + dx) = src[y * s.width + x];
        }
  return out;
}

/// Inverse of pixel_shuffle.
template <typename Scalar>
Tensor<Scalar> pixel_unshuffle(const Tensor<Scalar>& input, Index r) {
  const Shape& s = input.shape();
  detail::require(r > 0, "pixel_unshuffle factor must be positive");
  detail::require(s.height % r == 0 && s.width % r == 0,
                  "pixel_unshuffle spatial dims not divisible by r");
  const Index h = s.height / r;
  const Index w = s.width / r;
  Tensor<Scalar> out(Shape{s.batch, s.channels * r * r, h, w});
  for (Index b = 0; b < s.batch; ++b)
    for (Index c = 0; c < s.channels; ++c)
      for (Index dy = 0; dy < r; ++dy)
        for (Index dx = 0; dx < r; ++dx) {
          Scalar* dst = out.plane(b, c * r * r + dy * r + dx);
          for (Index y = 0; y < h; ++y)
            for (Index x = 0; x < w; ++x) dst[y * w + x] = input(b, c, r * y + dy, r * x + dx);
        }
  return out;
}

/// Mean squared error, accumulated in double.
template <typename Scalar>
double mse(const Tensor<Scalar>& pred, const Tensor<Scalar>& target) {
  detail::require(pred.shape() == target.shape(), "mse shape mismatch: " + to_string(pred.shape()) +
                                                      " vs " + to_string(target.shape()));
  detail::require(pred.size() > 0, "mse of empty tensors");
  const auto diff = (pred.array() - target.array()).template cast<double>();
  return diff.square().sum() / static_cast<double>(pred.size());
}

}  // namespace radapt
