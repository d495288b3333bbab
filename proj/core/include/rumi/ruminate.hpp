#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rumi/ad/lstm.hpp"
#include "rumi/ad/params.hpp"
#include "rumi/ad/tape.hpp"

namespace rumi {

/// Which inputs feed a ruminate gate and whether the encoding is carried
/// through the f * X term.
struct GateSwitches {
  bool encoding_input = true;
  bool summary_input = true;
  bool encoding_term = true;
  bool operator==(const GateSwitches&) const = default;
};

/// Ablation selector. Id 0 is the full model; 1..12 are the layer ablations.
struct VariantConfig {
  int id = 0;
  bool second_hop = true;          // summarizer, ruminate layers and hop-2 attention
  bool query_ruminate = true;
  bool context_ruminate = true;
  bool query_bilstm = false;       // BiLSTM over the tiled summary in the query layer
  bool context_bilstm = true;      // BiLSTM over the tiled summary in the context layer
  GateSwitches query_gate;
  GateSwitches context_gate;
  bool l2 = true;
  bool aqsl = true;
  bool local_search = true;        // windowed decoding; otherwise any end >= start
  std::string description;

  static constexpr int kFull = 0;
  static constexpr int kCount = 12;

  /// Throws std::invalid_argument for ids outside 0..12.
  static VariantConfig from_id(int id);
  /// Accepts "full" or "1".."12".
  static VariantConfig parse(std::string_view text);
  std::string name() const;
};

std::vector<VariantConfig> all_variants();

/// z = tanh(W1z S + W2z X + bz), f = sigmoid(W1f S + W2f X + bf).
/// Matrices are 2d x 2d and biases 2d x 1; w1* or w2* may be null when the
/// variant drops that input.
struct GateParams {
  const ad::Parameter* w1z = nullptr;
  const ad::Parameter* w2z = nullptr;
  const ad::Parameter* w1f = nullptr;
  const ad::Parameter* w2f = nullptr;
  const ad::Parameter* bz = nullptr;
  const ad::Parameter* bf = nullptr;
};

GateParams make_gate(ad::ParamStore& store, const std::string& prefix, std::size_t dim,
                     const GateSwitches& switches, ad::Rng& rng);

struct GateOutput {
  ad::Var out;   // 2d x n
  ad::Var gate;  // f, 2d x n
};

GateOutput apply_gate(ad::Var summary_tiled, ad::Var encoding, const GateParams& p,
                      const GateSwitches& switches);

/// s = [forward state at the last unmasked step; backward state at the first]: 2d x 1.
ad::Var summarize(ad::Var g, const ad::Mask& context_mask, const ad::BiLstmParams& summarizer,
                  const ad::DropoutCtx& drop = {});

/// Gated fusion of s (tiled over the query, optionally through a BiLSTM)
/// with the query encoding. Masked columns of the result are zero.
GateOutput query_ruminate(ad::Var query_enc, ad::Var summary, const ad::Mask& query_mask,
                          const GateParams& gate, const GateSwitches& switches,
                          const ad::BiLstmParams* summary_lstm, const ad::DropoutCtx& drop = {});

/// Same for the context; `summary_lstm` null means the tiled summary feeds
/// the gate directly.
GateOutput context_ruminate(ad::Var context_enc, ad::Var summary, const ad::Mask& context_mask,
                            const GateParams& gate, const GateSwitches& switches,
                            const ad::BiLstmParams* summary_lstm, const ad::DropoutCtx& drop = {});

/// Per-column L2 norm of a gate matrix.
std::vector<double> gate_norms(const ad::Tensor& gate);

}  // namespace rumi
