#include "rumi/ad/lstm.hpp"

#include <array>

namespace rumi::ad {

Var DropoutCtx::apply(Var x) const {
  if (!train || rate == 0.0 || rng == nullptr) return x;
  return dropout(x, rate, train, *rng);
}

LstmParams make_lstm(ParamStore& store, const std::string& prefix, std::size_t input,
                     std::size_t hidden, Rng& rng) {
  LstmParams p;
  p.input = input;
  p.hidden = hidden;
  p.wx = &store.add(prefix + ".wx", xavier_uniform(4 * hidden, input, rng), false, true);
  p.wh = &store.add(prefix + ".wh", xavier_uniform(4 * hidden, hidden, rng), false, true);
  p.b = &store.add(prefix + ".b", Tensor::matrix(4 * hidden, 1), false, false);
  return p;
}

BiLstmParams make_bilstm(ParamStore& store, const std::string& prefix, std::size_t input,
                         std::size_t hidden, Rng& rng) {
  return {make_lstm(store, prefix + ".fw", input, hidden, rng),
          make_lstm(store, prefix + ".bw", input, hidden, rng)};
}

LstmState zero_state(Tape& tape, std::size_t hidden) {
  return {tape.constant(Tensor::matrix(hidden, 1)), tape.constant(Tensor::matrix(hidden, 1))};
}

namespace {

void check_dims(const Tensor& x, const LstmParams& p) {
  if (x.rows() != p.input)
    throw ShapeError("lstm: input has " + std::to_string(x.rows()) + " rows, expected " +
                     std::to_string(p.input));
}

LstmState cell(Var preact, const LstmState& prev, std::size_t hidden) {
  Var i = sigmoid(slice(preact, 0, 0, hidden));
  Var f = sigmoid(slice(preact, 0, hidden, 2 * hidden));
  Var g = tanh(slice(preact, 0, 2 * hidden, 3 * hidden));
  Var o = sigmoid(slice(preact, 0, 3 * hidden, 4 * hidden));
  Var c = add(mul(f, prev.c), mul(i, g));
  Var h = mul(o, tanh(c));
  return {h, c};
}

}  // namespace

LstmState lstm_step(Var x, const LstmState& prev, const LstmParams& p) {
  check_dims(x.value(), p);
  if (prev.h.value().rows() != p.hidden || prev.c.value().rows() != p.hidden)
    throw ShapeError("lstm: state size does not match hidden size " + std::to_string(p.hidden));
  Tape& tape = *x.tape;
  Var pre = add(add(matmul(tape.param(*p.wx), x), matmul(tape.param(*p.wh), prev.h)),
                tape.param(*p.b));
  return cell(pre, prev, p.hidden);
}

SequenceOutput run_lstm(Var x, const Mask& mask, const LstmParams& p, bool reverse) {
  check_dims(x.value(), p);
  const std::size_t steps = x.cols();
  if (mask.size() != steps)
    throw ShapeError("lstm: mask length " + std::to_string(mask.size()) + " vs " +
                     std::to_string(steps) + " steps");
  Tape& tape = *x.tape;
  Var wh = tape.param(*p.wh);
  Var projected = add(matmul(tape.param(*p.wx), x), tile_column(tape.param(*p.b), steps));
  Var zero = tape.constant(Tensor::matrix(p.hidden, 1));
  LstmState state{zero, zero};

  std::vector<Var> columns(steps, zero);
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = reverse ? steps - 1 - k : k;
    if (!mask[t]) continue;
    Var pre = add(slice_column(projected, t), matmul(wh, state.h));
    state = cell(pre, state, p.hidden);
    columns[t] = state.h;
  }
  return {concat(columns, 1), state.h};
}

BiSequenceOutput run_bilstm(Var x, const Mask& mask, const BiLstmParams& p, const DropoutCtx& drop) {
  Var input = drop.apply(x);
  SequenceOutput fw = run_lstm(input, mask, p.fw, false);
  SequenceOutput bw = run_lstm(input, mask, p.bw, true);
  const std::array<Var, 2> parts{fw.outputs, bw.outputs};
  return {concat(parts, 0), fw.final_h, bw.final_h};
}

}  // namespace rumi::ad
