#include "rumi/ad/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rumi::ad {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::Transpose: return "transpose";
    case Op::Add: return "add";
    case Op::Mul: return "mul";
    case Op::Scale: return "scalar-scale";
    case Op::Concat: return "concat";
    case Op::Slice: return "slice";
    case Op::Tile: return "tile";
    case Op::Tanh: return "tanh";
    case Op::Sigmoid: return "sigmoid";
    case Op::Relu: return "relu";
    case Op::Log: return "log";
    case Op::MaskedSoftmax: return "masked-softmax";
    case Op::Max: return "max-over-axis";
    case Op::Mean: return "mean-over-axis";
    case Op::Sum: return "sum";
    case Op::Conv1d: return "conv1d";
    case Op::MaxPoolTime: return "max-pool-over-time";
    case Op::Dropout: return "dropout";
    case Op::Cosine: return "cosine-similarity";
    case Op::Gather: return "gather";
    case Op::Lerp: return "lerp";
  }
  return "unknown";
}

const Tensor& Var::value() const { return tape->value(*this); }

namespace {

[[noreturn]] void shape_fail(Op op, const std::string& detail) {
  throw ShapeError(std::string(op_name(op)) + ": " + detail);
}

void require_matrix(Op op, const Tensor& t, const char* which) {
  if (t.rank() != 2) shape_fail(op, std::string(which) + " must be rank 2, got " + shape_string(t.shape()));
}

Tape& tape_of(Op op, std::initializer_list<Var> vars) {
  Tape* tape = nullptr;
  for (const Var& v : vars) {
    if (!v.valid()) shape_fail(op, "invalid variable");
    if (tape && v.tape != tape) shape_fail(op, "operands live on different tapes");
    tape = v.tape;
  }
  return *tape;
}

Tape::Node make_node(Op op, std::initializer_list<Var> inputs) {
  Tape::Node n;
  n.op = op;
  for (const Var& v : inputs) n.inputs.push_back(v.id);
  return n;
}

// y = A * B with A: m x k, B: k x n.
void gemm(const double* a, const double* b, double* y, std::size_t m, std::size_t k,
          std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* yrow = y + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) yrow[j] += av * brow[j];
    }
  }
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------------------
// Tape

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::param(const Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{this, it->second};
  Var v = leaf(p.value, !p.frozen);
  param_nodes_.emplace(&p, v.id);
  return v;
}

Var Tape::record(Node node) {
  for (std::int32_t in : node.inputs) {
    if (in < 0 || static_cast<std::size_t>(in) >= nodes_.size())
      throw ShapeError(std::string(op_name(node.op)) + ": input id out of range");
    node.requires_grad = node.requires_grad || nodes_[static_cast<std::size_t>(in)].requires_grad;
  }
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
}

const Tensor* Gradients::of(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= grads_.size()) return nullptr;
  const Tensor& g = grads_[static_cast<std::size_t>(v.id)];
  return g.size() == 0 && g.rank() == 0 ? nullptr : &g;
}

const Tensor* Gradients::of(const Parameter& p) const {
  auto it = params_.find(&p);
  if (it == params_.end()) return nullptr;
  return of(Var{nullptr, it->second});
}

// ---------------------------------------------------------------------------
// Forward primitives

Var matmul(Var a, Var b) {
  Tape& t = tape_of(Op::MatMul, {a, b});
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_matrix(Op::MatMul, A, "lhs");
  require_matrix(Op::MatMul, B, "rhs");
  if (A.cols() != B.rows())
    shape_fail(Op::MatMul, "inner dims differ: " + shape_string(A.shape()) + " * " + shape_string(B.shape()));
  auto n = make_node(Op::MatMul, {a, b});
  n.value = Tensor::matrix(A.rows(), B.cols());
  gemm(A.data().data(), B.data().data(), n.value.data().data(), A.rows(), A.cols(), B.cols());
  return t.record(std::move(n));
}

Var transpose(Var a) {
  Tape& t = tape_of(Op::Transpose, {a});
  const Tensor& A = a.value();
  require_matrix(Op::Transpose, A, "input");
  auto n = make_node(Op::Transpose, {a});
  n.value = Tensor::matrix(A.cols(), A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) n.value.at(j, i) = A.at(i, j);
  return t.record(std::move(n));
}

namespace {
Var elementwise_binary(Op op, Var a, Var b) {
  Tape& t = tape_of(op, {a, b});
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!A.same_shape(B))
    shape_fail(op, "shapes differ: " + shape_string(A.shape()) + " vs " + shape_string(B.shape()));
  auto n = make_node(op, {a, b});
  n.value = Tensor(A.shape());
  auto& out = n.value.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = op == Op::Add ? A[i] + B[i] : A[i] * B[i];
  return t.record(std::move(n));
}

template <typename F>
Var elementwise_unary(Op op, Var a, F f) {
  Tape& t = tape_of(op, {a});
  const Tensor& A = a.value();
  auto n = make_node(op, {a});
  n.value = Tensor(A.shape());
  auto& out = n.value.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(A[i]);
  return t.record(std::move(n));
}
}  // namespace

Var add(Var a, Var b) { return elementwise_binary(Op::Add, a, b); }
Var mul(Var a, Var b) { return elementwise_binary(Op::Mul, a, b); }

Var scale(Var a, double s) {
  Tape& t = tape_of(Op::Scale, {a});
  auto n = make_node(Op::Scale, {a});
  n.scalar = s;
  n.value = a.value();
  for (double& v : n.value.data()) v *= s;
  return t.record(std::move(n));
}

Var concat(std::span<const Var> parts, int axis) {
  if (parts.empty()) shape_fail(Op::Concat, "no operands");
  if (axis != 0 && axis != 1) shape_fail(Op::Concat, "axis must be 0 or 1");
  Tape& t = tape_of(Op::Concat, {parts[0]});
  const std::size_t fixed = axis == 0 ? parts[0].value().cols() : parts[0].value().rows();
  std::size_t total = 0;
  Tape::Node n;
  n.op = Op::Concat;
  n.axis = axis;
  for (const Var& p : parts) {
    if (p.tape != &t) shape_fail(Op::Concat, "operands live on different tapes");
    const Tensor& P = p.value();
    require_matrix(Op::Concat, P, "operand");
    const std::size_t other = axis == 0 ? P.cols() : P.rows();
    if (other != fixed)
      shape_fail(Op::Concat, "axis " + std::to_string(axis) + " operands disagree: " +
                                 shape_string(parts[0].value().shape()) + " vs " + shape_string(P.shape()));
    total += axis == 0 ? P.rows() : P.cols();
    n.inputs.push_back(p.id);
  }
  n.value = axis == 0 ? Tensor::matrix(total, fixed) : Tensor::matrix(fixed, total);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& P = p.value();
    for (std::size_t i = 0; i < P.rows(); ++i)
      for (std::size_t j = 0; j < P.cols(); ++j) {
        if (axis == 0)
          n.value.at(offset + i, j) = P.at(i, j);
        else
          n.value.at(i, offset + j) = P.at(i, j);
      }
    offset += axis == 0 ? P.rows() : P.cols();
  }
  return t.record(std::move(n));
}

Var slice(Var a, int axis, std::size_t begin, std::size_t end) {
  Tape& t = tape_of(Op::Slice, {a});
  const Tensor& A = a.value();
  require_matrix(Op::Slice, A, "input");
  if (axis != 0 && axis != 1) shape_fail(Op::Slice, "axis must be 0 or 1");
  const std::size_t extent = axis == 0 ? A.rows() : A.cols();
  if (begin >= end || end > extent)
    shape_fail(Op::Slice, "range [" + std::to_string(begin) + "," + std::to_string(end) +
                              ") outside axis " + std::to_string(axis) + " of " + shape_string(A.shape()));
  auto n = make_node(Op::Slice, {a});
  n.axis = axis;
  n.begin = begin;
  n.end = end;
  if (axis == 0) {
    n.value = Tensor::matrix(end - begin, A.cols());
    std::copy(A.data().begin() + static_cast<std::ptrdiff_t>(begin * A.cols()),
              A.data().begin() + static_cast<std::ptrdiff_t>(end * A.cols()), n.value.data().begin());
  } else {
    n.value = Tensor::matrix(A.rows(), end - begin);
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = begin; j < end; ++j) n.value.at(i, j - begin) = A.at(i, j);
  }
  return t.record(std::move(n));
}

Var tile(Var a, int axis, std::size_t count) {
  Tape& t = tape_of(Op::Tile, {a});
  const Tensor& A = a.value();
  require_matrix(Op::Tile, A, "input");
  if (count == 0) shape_fail(Op::Tile, "count must be positive");
  auto n = make_node(Op::Tile, {a});
  n.axis = axis;
  if (axis == 1) {
    if (A.cols() != 1) shape_fail(Op::Tile, "axis 1 expects a column, got " + shape_string(A.shape()));
    n.value = Tensor::matrix(A.rows(), count);
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < count; ++j) n.value.at(i, j) = A[i];
  } else if (axis == 0) {
    if (A.rows() != 1) shape_fail(Op::Tile, "axis 0 expects a row, got " + shape_string(A.shape()));
    n.value = Tensor::matrix(count, A.cols());
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = 0; j < A.cols(); ++j) n.value.at(i, j) = A[j];
  } else {
    shape_fail(Op::Tile, "axis must be 0 or 1");
  }
  return t.record(std::move(n));
}

Var tanh(Var a) { return elementwise_unary(Op::Tanh, a, [](double x) { return std::tanh(x); }); }
Var sigmoid(Var a) { return elementwise_unary(Op::Sigmoid, a, sigmoid_scalar); }
Var relu(Var a) { return elementwise_unary(Op::Relu, a, [](double x) { return x > 0 ? x : 0.0; }); }
Var log(Var a) { return elementwise_unary(Op::Log, a, [](double x) { return std::log(x); }); }

Var masked_softmax(Var logits, const Mask& mask, int axis) {
  return masked_softmax(logits, std::make_shared<const Mask>(mask), axis);
}

Var masked_softmax(Var logits, std::shared_ptr<const Mask> mask, int axis) {
  Tape& t = tape_of(Op::MaskedSoftmax, {logits});
  const Tensor& X = logits.value();
  require_matrix(Op::MaskedSoftmax, X, "logits");
  if (axis != 0 && axis != 1) shape_fail(Op::MaskedSoftmax, "axis must be 0 or 1");
  const std::size_t len = axis == 1 ? X.cols() : X.rows();
  const std::size_t lanes = axis == 1 ? X.rows() : X.cols();
  if (!mask) mask = std::make_shared<const Mask>(len, 1);
  if (mask->size() != len)
    shape_fail(Op::MaskedSoftmax, "mask length " + std::to_string(mask->size()) + " vs axis length " +
                                      std::to_string(len) + " of " + shape_string(X.shape()));
  if (std::none_of(mask->begin(), mask->end(), [](std::uint8_t m) { return m != 0; }))
    throw ShapeError("masked-softmax: degenerate row, every position masked");

  auto n = make_node(Op::MaskedSoftmax, {logits});
  n.axis = axis;
  n.mask = mask;
  n.value = Tensor(X.shape());
  const std::size_t stride = X.cols();
  auto idx = [&](std::size_t lane, std::size_t k) {
    return axis == 1 ? lane * stride + k : k * stride + lane;
  };
  Tensor& Y = n.value;
  for (std::size_t lane = 0; lane < lanes; ++lane) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < len; ++k)
      if ((*mask)[k]) hi = std::max(hi, X[idx(lane, k)]);
    double total = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const double e = (*mask)[k] ? std::exp(X[idx(lane, k)] - hi) : 0.0;
      Y[idx(lane, k)] = e;
      total += e;
    }
    for (std::size_t k = 0; k < len; ++k) Y[idx(lane, k)] /= total;
  }
  return t.record(std::move(n));
}

namespace {
Var max_impl(Op op, Var a, int axis, std::shared_ptr<const Mask> mask) {
  Tape& t = tape_of(op, {a});
  const Tensor& A = a.value();
  require_matrix(op, A, "input");
  if (axis != 0 && axis != 1) shape_fail(op, "axis must be 0 or 1");
  const std::size_t len = axis == 1 ? A.cols() : A.rows();
  const std::size_t lanes = axis == 1 ? A.rows() : A.cols();
  if (mask && mask->size() != len)
    shape_fail(op, "mask length " + std::to_string(mask->size()) + " vs axis length " + std::to_string(len));
  auto n = make_node(op, {a});
  n.axis = axis;
  n.mask = mask;
  n.value = axis == 1 ? Tensor::matrix(lanes, 1) : Tensor::matrix(1, lanes);
  n.indices.assign(lanes, 0);
  for (std::size_t lane = 0; lane < lanes; ++lane) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = len;
    for (std::size_t k = 0; k < len; ++k) {
      if (mask && !(*mask)[k]) continue;
      const double v = axis == 1 ? A.at(lane, k) : A.at(k, lane);
      if (arg == len || v > best) {
        best = v;
        arg = k;
      }
    }
    if (arg == len) shape_fail(op, "every position masked");
    n.indices[lane] = arg;
    n.value[lane] = best;
  }
  return t.record(std::move(n));
}
}  // namespace

Var max(Var a, int axis, std::shared_ptr<const Mask> mask) {
  return max_impl(Op::Max, a, axis, std::move(mask));
}

Var mean(Var a, int axis) {
  Tape& t = tape_of(Op::Mean, {a});
  const Tensor& A = a.value();
  require_matrix(Op::Mean, A, "input");
  if (axis != 0 && axis != 1) shape_fail(Op::Mean, "axis must be 0 or 1");
  auto n = make_node(Op::Mean, {a});
  n.axis = axis;
  if (axis == 1) {
    n.value = Tensor::matrix(A.rows(), 1);
    for (std::size_t i = 0; i < A.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < A.cols(); ++j) s += A.at(i, j);
      n.value[i] = s / static_cast<double>(A.cols());
    }
  } else {
    n.value = Tensor::matrix(1, A.cols());
    for (std::size_t j = 0; j < A.cols(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < A.rows(); ++i) s += A.at(i, j);
      n.value[j] = s / static_cast<double>(A.rows());
    }
  }
  return t.record(std::move(n));
}

Var sum(Var a) {
  Tape& t = tape_of(Op::Sum, {a});
  auto n = make_node(Op::Sum, {a});
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  n.value = Tensor::scalar(s);
  return t.record(std::move(n));
}

Var conv1d(Var x, Var w, Var b, std::size_t width) {
  Tape& t = tape_of(Op::Conv1d, {x, w, b});
  const Tensor& X = x.value();
  const Tensor& W = w.value();
  const Tensor& B = b.value();
  require_matrix(Op::Conv1d, X, "input");
  require_matrix(Op::Conv1d, W, "filters");
  require_matrix(Op::Conv1d, B, "bias");
  const std::size_t in = X.rows();
  const std::size_t steps = X.cols();
  const std::size_t out = W.rows();
  if (width == 0 || W.cols() != in * width)
    shape_fail(Op::Conv1d, "filters " + shape_string(W.shape()) + " do not match " + std::to_string(in) +
                               " channels of width " + std::to_string(width));
  if (B.rows() != out || B.cols() != 1)
    shape_fail(Op::Conv1d, "bias " + shape_string(B.shape()) + " vs " + std::to_string(out) + " filters");
  if (steps < width)
    shape_fail(Op::Conv1d, "sequence length " + std::to_string(steps) + " shorter than width " +
                               std::to_string(width));
  auto n = make_node(Op::Conv1d, {x, w, b});
  n.end = width;
  const std::size_t positions = steps - width + 1;
  n.value = Tensor::matrix(out, positions);
  for (std::size_t o = 0; o < out; ++o)
    for (std::size_t p = 0; p < positions; ++p) {
      double acc = B[o];
      for (std::size_t i = 0; i < in; ++i)
        for (std::size_t k = 0; k < width; ++k) acc += W.at(o, i * width + k) * X.at(i, p + k);
      n.value.at(o, p) = acc;
    }
  return t.record(std::move(n));
}

Var max_pool_over_time(Var a) { return max_impl(Op::MaxPoolTime, a, 1, nullptr); }

Var dropout(Var a, double rate, bool train, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) shape_fail(Op::Dropout, "rate must lie in [0, 1)");
  if (!train || rate == 0.0) return a;
  Tape& t = tape_of(Op::Dropout, {a});
  auto n = make_node(Op::Dropout, {a});
  n.scalar = rate;
  const double keep_scale = 1.0 / (1.0 - rate);
  n.value = a.value();
  n.aux.resize(n.value.size());
  for (std::size_t i = 0; i < n.aux.size(); ++i) {
    n.aux[i] = rng.bernoulli(1.0 - rate) ? keep_scale : 0.0;
    n.value[i] *= n.aux[i];
  }
  return t.record(std::move(n));
}

Var cosine_similarity(Var a, Var b) {
  Tape& t = tape_of(Op::Cosine, {a, b});
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!A.same_shape(B))
    shape_fail(Op::Cosine, "shapes differ: " + shape_string(A.shape()) + " vs " + shape_string(B.shape()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    dot += A[i] * B[i];
    na += A[i] * A[i];
    nb += B[i] * B[i];
  }
  auto n = make_node(Op::Cosine, {a, b});
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  n.aux = {dot, na, nb};
  n.value = Tensor::scalar(na == 0.0 || nb == 0.0 ? 0.0 : dot / (na * nb));
  return t.record(std::move(n));
}

Var gather_columns(Var table, std::span<const std::size_t> ids) {
  Tape& t = tape_of(Op::Gather, {table});
  const Tensor& T = table.value();
  require_matrix(Op::Gather, T, "table");
  if (ids.empty()) shape_fail(Op::Gather, "empty id list");
  auto n = make_node(Op::Gather, {table});
  n.indices.assign(ids.begin(), ids.end());
  const std::size_t dim = T.cols();
  n.value = Tensor::matrix(dim, ids.size());
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (ids[j] >= T.rows())
      shape_fail(Op::Gather, "id " + std::to_string(ids[j]) + " outside table " + shape_string(T.shape()));
    for (std::size_t k = 0; k < dim; ++k) n.value.at(k, j) = T.at(ids[j], k);
  }
  return t.record(std::move(n));
}

Var lerp(Var f, Var a, Var b) {
  Tape& t = tape_of(Op::Lerp, {f, a, b});
  const Tensor& F = f.value();
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!F.same_shape(A) || !F.same_shape(B))
    shape_fail(Op::Lerp, "shapes differ: " + shape_string(F.shape()) + ", " + shape_string(A.shape()) +
                             ", " + shape_string(B.shape()));
  auto n = make_node(Op::Lerp, {f, a, b});
  n.value = Tensor(F.shape());
  for (std::size_t i = 0; i < F.size(); ++i) n.value[i] = std::lerp(B[i], A[i], F[i]);
  return t.record(std::move(n));
}

// ---------------------------------------------------------------------------
// Backward

std::uint64_t Tape::branch_signature() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  for (const Node& n : nodes_) {
    if (n.op == Op::Relu) {
      for (double x : nodes_[static_cast<std::size_t>(n.inputs[0])].value.data()) mix(x > 0);
    } else if (n.op == Op::Max || n.op == Op::MaxPoolTime) {
      for (std::size_t i : n.indices) mix(i);
    }
  }
  return h;
}

Gradients Tape::backward(Var loss) const {
  if (loss.tape != this) throw ShapeError("backward: loss belongs to another tape");
  const Tensor& L = value(loss);
  if (L.size() != 1) throw ShapeError("backward: loss must be scalar, got " + shape_string(L.shape()));

  std::vector<Tensor> grads(nodes_.size());
  auto has = [&](std::size_t id) { return grads[id].rank() != 0; };
  auto acc = [&](std::int32_t id) -> Tensor* {
    const auto k = static_cast<std::size_t>(id);
    if (!nodes_[k].requires_grad) return nullptr;
    if (!has(k)) grads[k] = Tensor(nodes_[k].value.shape());
    return &grads[k];
  };

  if (!nodes_[static_cast<std::size_t>(loss.id)].requires_grad)
    return Gradients(std::move(grads), param_nodes_);
  grads[static_cast<std::size_t>(loss.id)] = Tensor(L.shape(), 1.0);

  for (std::int32_t id = loss.id; id >= 0; --id) {
    const auto k = static_cast<std::size_t>(id);
    if (!has(k)) continue;
    const Node& n = nodes_[k];
    if (n.op == Op::Leaf) continue;
    const Tensor& G = grads[k];
    const Tensor& Y = n.value;
    auto in_value = [&](std::size_t i) -> const Tensor& {
      return nodes_[static_cast<std::size_t>(n.inputs[i])].value;
    };

    switch (n.op) {
      case Op::Leaf: break;
      case Op::MatMul: {
        const Tensor& A = in_value(0);
        const Tensor& B = in_value(1);
        const std::size_t m = A.rows(), kk = A.cols(), cols = B.cols();
        if (Tensor* gA = acc(n.inputs[0])) {
          // dA = G * B^T
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < kk; ++p) {
              double s = 0.0;
              for (std::size_t j = 0; j < cols; ++j) s += G.at(i, j) * B.at(p, j);
              gA->at(i, p) += s;
            }
        }
        if (Tensor* gB = acc(n.inputs[1])) {
          // dB = A^T * G
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < kk; ++p) {
              const double av = A.at(i, p);
              if (av == 0.0) continue;
              for (std::size_t j = 0; j < cols; ++j) gB->at(p, j) += av * G.at(i, j);
            }
        }
        break;
      }
      case Op::Transpose: {
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t i = 0; i < G.rows(); ++i)
            for (std::size_t j = 0; j < G.cols(); ++j) g->at(j, i) += G.at(i, j);
        break;
      }
      case Op::Add: {
        for (std::size_t s = 0; s < 2; ++s)
          if (Tensor* g = acc(n.inputs[s]))
            for (std::size_t i = 0; i < G.size(); ++i) (*g)[i] += G[i];
        break;
      }
      case Op::Mul: {
        const Tensor& A = in_value(0);
        const Tensor& B = in_value(1);
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t i = 0; i < G.size(); ++i) (*g)[i] += G[i] * B[i];
        if (Tensor* g = acc(n.inputs[1]))
          for (std::size_t i = 0; i < G.size(); ++i) (*g)[i] += G[i] * A[i];
        break;
      }
      case Op::Scale: {
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t i = 0; i < G.size(); ++i) (*g)[i] += G[i] * n.scalar;
        break;
      }
      case Op::Concat: {
        std::size_t offset = 0;
        for (std::int32_t in : n.inputs) {
          const Tensor& P = nodes_[static_cast<std::size_t>(in)].value;
          if (Tensor* g = acc(in)) {
            for (std::size_t i = 0; i < P.rows(); ++i)
              for (std::size_t j = 0; j < P.cols(); ++j)
                g->at(i, j) += n.axis == 0 ? G.at(offset + i, j) : G.at(i, offset + j);
          }
          offset += n.axis == 0 ? P.rows() : P.cols();
        }
        break;
      }
      case Op::Slice: {
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t i = 0; i < G.rows(); ++i)
            for (std::size_t j = 0; j < G.cols(); ++j) {
              if (n.axis == 0)
                g->at(n.begin + i, j) += G.at(i, j);
              else
                g->at(i, n.begin + j) += G.at(i, j);
            }
        break;
      }
      case Op::Tile: {
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t i = 0; i < G.rows(); ++i)
            for (std::size_t j = 0; j < G.cols(); ++j) (*g)[n.axis == 1 ? i : j] += G.at(i, j);
        break;
      }
      case Op::Tanh: {
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t i = 0; i < G.size(); ++i) (*g)[i] += G[i] * (1.0 - Y[i] * Y[i]);
        break;
      }
      case Op::Sigmoid: {
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t i = 0; i < G.size(); ++i) (*g)[i] += G[i] * Y[i] * (1.0 - Y[i]);
        break;
      }
      case Op::Relu: {
        const Tensor& A = in_value(0);
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t i = 0; i < G.size(); ++i) (*g)[i] += A[i] > 0 ? G[i] : 0.0;
        break;
      }
      case Op::Log: {
        const Tensor& A = in_value(0);
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t i = 0; i < G.size(); ++i) (*g)[i] += G[i] / A[i];
        break;
      }
      case Op::MaskedSoftmax: {
        if (Tensor* g = acc(n.inputs[0])) {
          const bool rows = n.axis == 1;
          const std::size_t lanes = rows ? Y.rows() : Y.cols();
          const std::size_t len = rows ? Y.cols() : Y.rows();
          for (std::size_t lane = 0; lane < lanes; ++lane) {
            double dot = 0.0;
            for (std::size_t q = 0; q < len; ++q)
              dot += rows ? Y.at(lane, q) * G.at(lane, q) : Y.at(q, lane) * G.at(q, lane);
            for (std::size_t q = 0; q < len; ++q) {
              if (rows)
                g->at(lane, q) += Y.at(lane, q) * (G.at(lane, q) - dot);
              else
                g->at(q, lane) += Y.at(q, lane) * (G.at(q, lane) - dot);
            }
          }
        }
        break;
      }
      case Op::Max:
      case Op::MaxPoolTime: {
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t lane = 0; lane < n.indices.size(); ++lane) {
            if (n.axis == 1)
              g->at(lane, n.indices[lane]) += G[lane];
            else
              g->at(n.indices[lane], lane) += G[lane];
          }
        break;
      }
      case Op::Mean: {
        if (Tensor* g = acc(n.inputs[0])) {
          const std::size_t count = n.axis == 1 ? g->cols() : g->rows();
          const double inv = 1.0 / static_cast<double>(count);
          for (std::size_t i = 0; i < g->rows(); ++i)
            for (std::size_t j = 0; j < g->cols(); ++j) g->at(i, j) += G[n.axis == 1 ? i : j] * inv;
        }
        break;
      }
      case Op::Sum: {
        if (Tensor* g = acc(n.inputs[0]))
          for (double& v : g->data()) v += G[0];
        break;
      }
      case Op::Conv1d: {
        const Tensor& X = in_value(0);
        const Tensor& W = in_value(1);
        const std::size_t width = n.end;
        const std::size_t in = X.rows();
        Tensor* gX = acc(n.inputs[0]);
        Tensor* gW = acc(n.inputs[1]);
        Tensor* gB = acc(n.inputs[2]);
        for (std::size_t o = 0; o < G.rows(); ++o)
          for (std::size_t p = 0; p < G.cols(); ++p) {
            const double go = G.at(o, p);
            if (go == 0.0) continue;
            if (gB) (*gB)[o] += go;
            for (std::size_t i = 0; i < in; ++i)
              for (std::size_t kk = 0; kk < width; ++kk) {
                if (gW) gW->at(o, i * width + kk) += go * X.at(i, p + kk);
                if (gX) gX->at(i, p + kk) += go * W.at(o, i * width + kk);
              }
          }
        break;
      }
      case Op::Dropout: {
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t i = 0; i < G.size(); ++i) (*g)[i] += G[i] * n.aux[i];
        break;
      }
      case Op::Cosine: {
        const double dot = n.aux[0], na = n.aux[1], nb = n.aux[2];
        if (na == 0.0 || nb == 0.0) break;
        const double c = Y[0];
        const Tensor& A = in_value(0);
        const Tensor& B = in_value(1);
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t i = 0; i < A.size(); ++i)
            (*g)[i] += G[0] * (B[i] / (na * nb) - c * A[i] / (na * na));
        if (Tensor* g = acc(n.inputs[1]))
          for (std::size_t i = 0; i < B.size(); ++i)
            (*g)[i] += G[0] * (A[i] / (na * nb) - c * B[i] / (nb * nb));
        (void)dot;
        break;
      }
      case Op::Gather: {
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t j = 0; j < n.indices.size(); ++j)
            for (std::size_t kk = 0; kk < G.rows(); ++kk) g->at(n.indices[j], kk) += G.at(kk, j);
        break;
      }
      case Op::Lerp: {
        const Tensor& F = in_value(0);
        const Tensor& A = in_value(1);
        const Tensor& B = in_value(2);
        if (Tensor* g = acc(n.inputs[0]))
          for (std::size_t i = 0; i < G.size(); ++i) (*g)[i] += G[i] * (A[i] - B[i]);
        if (Tensor* g = acc(n.inputs[1]))
          for (std::size_t i = 0; i < G.size(); ++i) (*g)[i] += G[i] * F[i];
        if (Tensor* g = acc(n.inputs[2]))
          for (std::size_t i = 0; i < G.size(); ++i) (*g)[i] += G[i] * (1.0 - F[i]);
        break;
      }
    }
  }
  return Gradients(std::move(grads), param_nodes_);
}

}  // namespace rumi::ad
