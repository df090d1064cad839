#pragma once

// Define-by-run reverse-mode differentiation. A Graph records every node
// created by the free-function operators below; backward() walks the tape in
// reverse creation order and overwrites the gradients of the ParamStore.

#include <functional>
#include <optional>
#include <vector>

#include "radapt/optim.hpp"
#include "radapt/tensor_ops.hpp"

namespace radapt {

/// Handle to a node of a Graph.
struct Var {
  std::size_t id = 0;
};

template <typename Scalar>
class Graph {
 public:
  using TensorT = Tensor<Scalar>;
  using BackwardFn = std::function<void(Graph&, const TensorT& upstream)>;

  /// With record_gradients = false nothing is kept for backward; used for
  /// inference.
  explicit Graph(bool record_gradients = true) : recording_(record_gradients) {}

  bool recording() const { return recording_; }

  Var input(TensorT value) { return push(std::move(value), false, {}, std::nullopt); }

  /// Leaf bound to a ParamStore entry; its gradient lands in that entry.
  Var parameter(const ParamStore<Scalar>& store, std::string_view name) {
    const std::size_t idx = store.index_of(name);
    return push(store.entry(idx).value, recording_, {}, idx);
  }

  /// Record an op result. `backward` receives the upstream gradient of the
  /// new node and must call accumulate() on the parents it depends on.
  Var emplace(TensorT value, std::initializer_list<Var> parents, BackwardFn backward) {
    bool needs = false;
    if (recording_)
      for (Var p : parents) needs = needs || nodes_[p.id].requires_grad;
    Var v = push(std::move(value), needs, std::move(backward), std::nullopt);
    return v;
  }

  const TensorT& value(Var v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  void accumulate(Var v, const TensorT& g) {
    auto& n = nodes_[v.id];
    if (!n.requires_grad) return;
    if (n.grad.shape() != n.value.shape()) {
      n.grad = g;
      return;
    }
    n.grad.array() += g.array();
  }

  /// Gradient of the last backward() w.r.t. v (empty if unreached).
  const TensorT& grad(Var v) const { return nodes_.at(v.id).grad; }

  /// Reverse sweep from a scalar loss. Every parameter gradient of `store`
  /// is overwritten: reached entries get d loss / d param, others zero.
  void backward(Var loss, ParamStore<Scalar>& store) {
    backward(loss);
    store.zero_grad();
    for (const auto& n : nodes_)
      if (n.param_index && !n.grad.empty()) store.entry(*n.param_index).grad.array() += n.grad.array();
  }

  /// Reverse sweep without writing into a store; node gradients remain
  /// readable through grad().
  void backward(Var loss) {
    detail::require(recording_, "backward on a graph built without gradient recording");
    const TensorT& lv = value(loss);
    detail::require(lv.size() == 1, "backward requires a scalar loss, got shape " + to_string(lv.shape()));
    for (auto& n : nodes_) n.grad = TensorT();
    if (!nodes_[loss.id].requires_grad) return;
    nodes_[loss.id].grad = TensorT::constant(lv.shape(), Scalar(1));
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      auto& n = nodes_[i];
      if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
      // The closure may append to parents' grads; n itself is not touched.
      const TensorT upstream = n.grad;
      n.backward(*this, upstream);
    }
  }

 private:
  struct Node {
    TensorT value;
    TensorT grad;
    bool requires_grad = false;
    BackwardFn backward;
    std::optional<std::size_t> param_index;
  };

  Var push(TensorT value, bool requires_grad, BackwardFn backward, std::optional<std::size_t> param) {
    nodes_.push_back({std::move(value), TensorT(), requires_grad,
                      requires_grad ? std::move(backward) : BackwardFn(), param});
    return Var{nodes_.size() - 1};
  }

  bool recording_;
  std::vector<Node> nodes_;
};

template <typename Scalar>
Var conv2d(Graph<Scalar>& g, Var input, Var weight, Var bias, Index stride = 1, Index padding = 0) {
  const auto& x = g.value(input);
  const auto& w = g.value(weight);
  const auto& b = g.value(bias);
  if (!g.recording()) return g.emplace(conv2d(x, w, b, stride, padding), {input, weight, bias}, {});
  const ConvGeometry geo = conv_geometry<Scalar>(x.shape(), w.shape(), stride, padding);
  detail::require(b.size() == geo.out_channels, "conv2d bias length must equal out_c");
  auto cols = im2col(x, geo);
  typename Tensor<Scalar>::RowMatrix out = w.matrix(geo.out_channels, geo.patch_size()) * cols;
  out.colwise() += Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(b.data(), geo.out_channels);
  auto value = columns_to_tensor<Scalar>(out, geo);
  return g.emplace(
      std::move(value), {input, weight, bias},
      [input, weight, bias, geo, cols = std::move(cols)](Graph<Scalar>& gr, const Tensor<Scalar>& up) {
        const auto dy = tensor_to_columns(up);
        if (gr.requires_grad(weight)) {
          Tensor<Scalar> dw(gr.value(weight).shape());
          dw.matrix(geo.out_channels, geo.patch_size()).noalias() = dy * cols.transpose();
          gr.accumulate(weight, dw);
        }
        if (gr.requires_grad(bias)) {
          Tensor<Scalar> db(gr.value(bias).shape());
          Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(db.data(), geo.out_channels) =
              dy.rowwise().sum();
          gr.accumulate(bias, db);
        }
        if (gr.requires_grad(input)) {
          typename Tensor<Scalar>::RowMatrix dcols =
              gr.value(weight).matrix(geo.out_channels, geo.patch_size()).transpose() * dy;
          Tensor<Scalar> dx(gr.value(input).shape());
          col2im_add<Scalar>(dcols, geo, dx);
          gr.accumulate(input, dx);
        }
      });
}

template <typename Scalar>
Var relu(Graph<Scalar>& g, Var input) {
  return g.emplace(relu(g.value(input)), {input}, [input](Graph<Scalar>& gr, const Tensor<Scalar>& up) {
    const auto& x = gr.value(input);
    gr.accumulate(input, Tensor<Scalar>(x.shape(), (x.array() > Scalar(0)).select(up.array(), Scalar(0))));
  });
}

template <typename Scalar>
Var add(Graph<Scalar>& g, Var a, Var b) {
  detail::require(g.value(a).shape() == g.value(b).shape(),
                  "add shape mismatch: " + to_string(g.value(a).shape()) + " vs " +
                      to_string(g.value(b).shape()));
  Tensor<Scalar> sum(g.value(a).shape(), g.value(a).array() + g.value(b).array());
  return g.emplace(std::move(sum), {a, b}, [a, b](Graph<Scalar>& gr, const Tensor<Scalar>& up) {
    gr.accumulate(a, up);
    gr.accumulate(b, up);
  });
}

template <typename Scalar>
Var scale(Graph<Scalar>& g, Var a, Scalar factor) {
  Tensor<Scalar> out(g.value(a).shape(), g.value(a).array() * factor);
  return g.emplace(std::move(out), {a}, [a, factor](Graph<Scalar>& gr, const Tensor<Scalar>& up) {
    gr.accumulate(a, Tensor<Scalar>(up.shape(), up.array() * factor));
  });
}

template <typename Scalar>
Var pixel_shuffle(Graph<Scalar>& g, Var input, Index r) {
  return g.emplace(pixel_shuffle(g.value(input), r), {input},
                   [input, r](Graph<Scalar>& gr, const Tensor<Scalar>& up) {
                     gr.accumulate(input, pixel_unshuffle(up, r));
                   });
}

/// Mean-reduced squared error as a (1,1,1,1) node; the sum runs in double.
template <typename Scalar>
Var mse_loss(Graph<Scalar>& g, Var pred, Var target) {
  const double loss = mse(g.value(pred), g.value(target));
  return g.emplace(Tensor<Scalar>::constant(Shape{1, 1, 1, 1}, static_cast<Scalar>(loss)), {pred, target},
                   [pred, target](Graph<Scalar>& gr, const Tensor<Scalar>& up) {
                     const auto& p = gr.value(pred);
                     const auto& t = gr.value(target);
                     const Scalar k = Scalar(2) * up.array()(0) / static_cast<Scalar>(p.size());
                     Tensor<Scalar> d(p.shape(), (p.array() - t.array()) * k);
                     gr.accumulate(pred, d);
                     if (gr.requires_grad(target)) gr.accumulate(target, Tensor<Scalar>(d.shape(), -d.array()));
                   });
}

/// Sum of all elements as a scalar node (handy for gradient checks).
template <typename Scalar>
Var sum(Graph<Scalar>& g, Var a) {
  const double s = g.value(a).array().template cast<double>().sum();
  return g.emplace(Tensor<Scalar>::constant(Shape{1, 1, 1, 1}, static_cast<Scalar>(s)), {a},
                   [a](Graph<Scalar>& gr, const Tensor<Scalar>& up) {
                     gr.accumulate(a, Tensor<Scalar>::constant(gr.value(a).shape(), up.array()(0)));
                   });
}

}  // namespace radapt
