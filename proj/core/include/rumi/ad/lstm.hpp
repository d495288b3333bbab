#pragma once

#include <string>

#include "rumi/ad/params.hpp"
#include "rumi/ad/tape.hpp"

namespace rumi::ad {

/// Inverted-dropout settings threaded through a forward pass.
struct DropoutCtx {
  double rate = 0.0;
  bool train = false;
  Rng* rng = nullptr;

  Var apply(Var x) const;
};

/// Single-direction LSTM. Gate rows are stacked as [input; forget; cell; output],
/// so wx is 4h x in, wh is 4h x h and b is 4h x 1.
struct LstmParams {
  const Parameter* wx = nullptr;
  const Parameter* wh = nullptr;
  const Parameter* b = nullptr;
  std::size_t input = 0;
  std::size_t hidden = 0;
};

struct BiLstmParams {
  LstmParams fw;
  LstmParams bw;
};

LstmParams make_lstm(ParamStore& store, const std::string& prefix, std::size_t input,
                     std::size_t hidden, Rng& rng);
BiLstmParams make_bilstm(ParamStore& store, const std::string& prefix, std::size_t input,
                         std::size_t hidden, Rng& rng);

struct LstmState {
  Var h;
  Var c;
};

LstmState zero_state(Tape& tape, std::size_t hidden);

/// One cell update: gates = wx x + wh h + b; c' = f*c + i*g; h' = o*tanh(c').
LstmState lstm_step(Var x, const LstmState& prev, const LstmParams& p);

struct SequenceOutput {
  Var outputs;  // hidden x T, zero columns at masked positions
  Var final_h;  // state after the last unmasked step in run order
};

/// Runs over the columns of x (in x T). Masked positions leave the state
/// untouched and emit a zero column.
SequenceOutput run_lstm(Var x, const Mask& mask, const LstmParams& p, bool reverse);

struct BiSequenceOutput {
  Var outputs;    // 2h x T: forward rows on top of backward rows
  Var forward_h;  // forward state at the last unmasked position
  Var backward_h; // backward state at the first unmasked position
};

BiSequenceOutput run_bilstm(Var x, const Mask& mask, const BiLstmParams& p,
                            const DropoutCtx& drop = {});

}  // namespace rumi::ad
