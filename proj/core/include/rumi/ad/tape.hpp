#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rumi/ad/params.hpp"
#include "rumi/ad/tensor.hpp"

namespace rumi::ad {

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  Transpose,
  Add,
  Mul,
  Scale,
  Concat,
  Slice,
  Tile,
  Tanh,
  Sigmoid,
  Relu,
  Log,
  MaskedSoftmax,
  Max,
  Mean,
  Sum,
  Conv1d,
  MaxPoolTime,
  Dropout,
  Cosine,
  Gather,
  Lerp,
};

std::string_view op_name(Op op);

using Mask = std::vector<std::uint8_t>;

class Tape;

/// Handle to a node on a tape. Cheap to copy; only valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::int32_t id = -1;

  bool valid() const noexcept { return tape != nullptr && id >= 0; }
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

class Gradients;

/// Append-only record of primitive applications. Node k's inputs all have
/// ids < k, so insertion order is a topological order.
class Tape {
 public:
  struct Node {
    Op op = Op::Leaf;
    std::vector<std::int32_t> inputs;
    Tensor value;
    bool requires_grad = false;
    // Per-primitive attributes.
    int axis = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
    double scalar = 0.0;
    std::shared_ptr<const Mask> mask;
    std::vector<std::size_t> indices;
    std::vector<double> aux;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = false);
  Var constant(Tensor value) { return leaf(std::move(value), false); }
  /// Leaf bound to a parameter; repeated calls return the same node.
  Var param(const Parameter& p);

  Var record(Node node);

  const Node& node(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)); }
  const Tensor& value(Var v) const { return node(v).value; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse-mode accumulation from a scalar loss.
  Gradients backward(Var loss) const;

  /// Hash of the branch taken by every piecewise primitive (relu sign,
  /// argmax). Equal signatures mean the same smooth piece of the graph.
  std::uint64_t branch_signature() const;

 private:
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::int32_t> param_nodes_;
};

/// Result of Tape::backward: gradient per node id, only for nodes that
/// require a gradient and lie on a path to the loss.
class Gradients {
 public:
  Gradients() = default;
  Gradients(std::vector<Tensor> grads,
            std::unordered_map<const Parameter*, std::int32_t> params)
      : grads_(std::move(grads)), params_(std::move(params)) {}

  const Tensor* of(Var v) const;
  const Tensor* of(const Parameter& p) const;
  bool has(Var v) const { return of(v) != nullptr; }

 private:
  std::vector<Tensor> grads_;
  std::unordered_map<const Parameter*, std::int32_t> params_;
};

// Primitives. Each records one node on the tape of its first argument and
// throws ShapeError naming the primitive and dims on mismatch.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var concat(std::span<const Var> parts, int axis);
Var slice(Var a, int axis, std::size_t begin, std::size_t end);
inline Var slice_column(Var a, std::size_t c) { return slice(a, 1, c, c + 1); }
/// axis 1: r x 1 -> r x n; axis 0: 1 x c -> n x c.
Var tile(Var a, int axis, std::size_t n);
inline Var tile_column(Var a, std::size_t n) { return tile(a, 1, n); }
Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var log(Var a);
/// axis 1: softmax along each row, mask indexes columns; axis 0: along each
/// column, mask indexes rows. Masked entries are exactly zero.
Var masked_softmax(Var logits, std::shared_ptr<const Mask> mask, int axis = 1);
Var masked_softmax(Var logits, const Mask& mask, int axis = 1);
/// Max along axis; optional mask excludes entries along that axis.
Var max(Var a, int axis, std::shared_ptr<const Mask> mask = nullptr);
Var mean(Var a, int axis);
Var sum(Var a);
/// x: in x T, w: out x (in * width), b: out x 1 -> out x (T - width + 1).
Var conv1d(Var x, Var w, Var b, std::size_t width);
Var max_pool_over_time(Var a);
/// Inverted dropout; identity when !train or rate == 0.
Var dropout(Var a, double rate, bool train, Rng& rng);
/// Cosine similarity of two equally shaped tensors as 1 x 1; zero operand gives 0.
Var cosine_similarity(Var a, Var b);
/// table: N x e, ids -> e x ids.size() (row ids[j] becomes column j).
Var gather_columns(Var table, std::span<const std::size_t> ids);
/// f * a + (1 - f) * b elementwise, evaluated so the result stays inside [a, b].
Var lerp(Var f, Var a, Var b);

}  // namespace rumi::ad
