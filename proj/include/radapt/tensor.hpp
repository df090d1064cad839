#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <ostream>
#include <span>
#include <string>

#include "radapt/errors.hpp"

namespace radapt {

using Index = Eigen::Index;

/// Rank-4 extent in (batch, channel, height, width) order.
struct Shape {
  Index batch = 0;
  Index channels = 0;
  Index height = 0;
  Index width = 0;

  constexpr Index size() const { return batch * channels * height * width; }
  constexpr Index plane() const { return height * width; }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.batch) + "," + std::to_string(s.channels) + "," +
         std::to_string(s.height) + "," + std::to_string(s.width) + ")";
}

inline std::ostream& operator<<(std::ostream& os, const Shape& s) { return os << to_string(s); }

/// Dense row-major (b, c, h, w) array. Storage is an Eigen column array so
/// that elementwise work stays in Eigen expressions.
template <typename Scalar>
class Tensor {
 public:
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(validated(shape)), data_(Storage::Zero(shape.size())) {}

  Tensor(Shape shape, Storage data) : shape_(validated(shape)), data_(std::move(data)) {
    detail::require(data_.size() == shape_.size(),
                    "tensor data length does not match shape " + to_string(shape_));
  }

  static Tensor constant(Shape shape, Scalar value) {
    return Tensor(shape, Storage::Constant(shape.size(), value));
  }

  const Shape& shape() const { return shape_; }
  Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  Storage& array() { return data_; }
  const Storage& array() const { return data_; }

  std::span<Scalar> values() { return {data_.data(), static_cast<std::size_t>(data_.size())}; }
  std::span<const Scalar> values() const {
    return {data_.data(), static_cast<std::size_t>(data_.size())};
  }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Index offset(Index b, Index c, Index y, Index x) const {
    return ((b * shape_.channels + c) * shape_.height + y) * shape_.width + x;
  }
  Scalar& operator()(Index b, Index c, Index y, Index x) { return data_[offset(b, c, y, x)]; }
  Scalar operator()(Index b, Index c, Index y, Index x) const { return data_[offset(b, c, y, x)]; }

  Scalar* plane(Index b, Index c) { return data_.data() + offset(b, c, 0, 0); }
  const Scalar* plane(Index b, Index c) const { return data_.data() + offset(b, c, 0, 0); }

  /// View as (rows x cols) row-major matrix; rows * cols must equal size().
  Eigen::Map<RowMatrix> matrix(Index rows, Index cols) {
    detail::require(rows * cols == size(), "matrix view does not cover tensor");
    return {data_.data(), rows, cols};
  }
  Eigen::Map<const RowMatrix> matrix(Index rows, Index cols) const {
    detail::require(rows * cols == size(), "matrix view does not cover tensor");
    return {data_.data(), rows, cols};
  }

  Tensor reshaped(Shape shape) const { return Tensor(shape, data_); }

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(shape_, data_.template cast<Other>());
  }

  bool all_finite() const { return data_.allFinite(); }

 private:
  static Shape validated(Shape s) {
    detail::require(s.batch >= 0 && s.channels >= 0 && s.height >= 0 && s.width >= 0,
                    "negative tensor dimension");
    return s;
  }

  Shape shape_{};
  Storage data_;
};

using Tensorf = Tensor<float>;
using Tensord = Tensor<double>;

/// 64-bit FNV-1a over raw bytes; used for checkpoint and content checksums.
inline std::uint64_t fnv1a64(const void* bytes, std::size_t count,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < count; ++i) {
    hash ^= p[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

template <typename Scalar>
std::uint64_t checksum(const Tensor<Scalar>& t, std::uint64_t hash = 0xcbf29ce484222325ULL) {
  return fnv1a64(t.data(), static_cast<std::size_t>(t.size()) * sizeof(Scalar), hash);
}

}  // namespace radapt
