#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "radapt/tensor.hpp"

namespace radapt {

template <typename Scalar>
struct ParamEntry {
  std::string name;
  Tensor<Scalar> value;
  Tensor<Scalar> grad;
  Tensor<Scalar> adam_m;
  Tensor<Scalar> adam_v;
};

/// Named trainable parameters in insertion order, with gradient and Adam
/// moment slots of matching shape.
template <typename Scalar>
class ParamStore {
 public:
  std::size_t add(std::string name, Tensor<Scalar> value) {
    detail::require(!index_.contains(name), "duplicate parameter name: " + name);
    const Shape shape = value.shape();
    index_.emplace(name, entries_.size());
    entries_.push_back({std::move(name), std::move(value), Tensor<Scalar>(shape),
                        Tensor<Scalar>(shape), Tensor<Scalar>(shape)});
    return entries_.size() - 1;
  }

  std::size_t size() const { return entries_.size(); }
  bool contains(std::string_view name) const { return index_.contains(std::string(name)); }

  std::size_t index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    detail::require(it != index_.end(), "unknown parameter: " + std::string(name));
    return it->second;
  }

  ParamEntry<Scalar>& entry(std::size_t i) { return entries_.at(i); }
  const ParamEntry<Scalar>& entry(std::size_t i) const { return entries_.at(i); }
  ParamEntry<Scalar>& operator[](std::string_view name) { return entries_[index_of(name)]; }
  const ParamEntry<Scalar>& operator[](std::string_view name) const { return entries_[index_of(name)]; }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad() {
    for (auto& e : entries_) e.grad.array().setZero();
  }

  Index parameter_count() const {
    Index n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

  std::int64_t step_count() const { return step_count_; }
  void advance_step() { ++step_count_; }

  /// Checksum over names, shapes and values (not optimizer state).
  std::uint64_t checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& e : entries_) {
      h = fnv1a64(e.name.data(), e.name.size(), h);
      const Shape& s = e.value.shape();
      h = fnv1a64(&s, sizeof(Shape), h);
      h = radapt::checksum(e.value, h);
    }
    return h;
  }

 private:
  std::vector<ParamEntry<Scalar>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::int64_t step_count_ = 0;
};

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    detail::require(lr > 0.0, "adam lr must be positive");
    detail::require(beta1 > 0.0 && beta1 < 1.0, "adam beta1 must lie in (0,1)");
    detail::require(beta2 > 0.0 && beta2 < 1.0, "adam beta2 must lie in (0,1)");
    detail::require(eps > 0.0, "adam eps must be positive");
  }
};

/// One bias-corrected Adam update over every entry; increments step_count.
/// lr_override replaces hyper.lr when non-negative (used for lr = 0 no-op
/// runs and step schedules).
template <typename Scalar>
void adam_step(ParamStore<Scalar>& params, const AdamHyper& hyper, double lr_override = -1.0) {
  const double lr = lr_override >= 0.0 ? lr_override : hyper.lr;
  params.advance_step();
  const double t = static_cast<double>(params.step_count());
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);
  const auto b1 = static_cast<Scalar>(hyper.beta1);
  const auto b2 = static_cast<Scalar>(hyper.beta2);
  const auto step = static_cast<Scalar>(lr / correction1);
  const auto root_c2 = static_cast<Scalar>(std::sqrt(correction2));
  const auto eps = static_cast<Scalar>(hyper.eps);
  for (auto& e : params) {
    auto& g = e.grad.array();
    auto& m = e.adam_m.array();
    auto& v = e.adam_v.array();
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.square();
    if (lr == 0.0) continue;
    // lr * m_hat / (sqrt(v_hat) + eps), with m_hat = m / c1, v_hat = v / c2.
    e.value.array() -= step * m / (v.sqrt() / root_c2 + eps);
  }
}

}  // namespace radapt
