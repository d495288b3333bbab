#pragma once

#include "rumi/ad/lstm.hpp"
#include "rumi/ad/params.hpp"
#include "rumi/ad/tape.hpp"

namespace rumi {

/// w_I stored as a 1 x 6d row: [w_c; w_q; w_cq].
struct AttentionParams {
  const ad::Parameter* w = nullptr;
  std::size_t hidden = 0;  // d
};

AttentionParams make_attention(ad::ParamStore& store, const std::string& prefix, std::size_t hidden,
                               ad::Rng& rng);

/// Interaction matrix, row-wise context-to-query weights a (C x Q) and
/// query-to-context weights b (C x 1), captured for one hop.
struct AttentionTrace {
  ad::Tensor interaction;
  ad::Tensor c2q;
  ad::Tensor q2c;
  int hop = 1;
};

/// Shared BiLSTM encoder: d x len -> 2d x len, zero columns where masked.
ad::Var encode(ad::Var x, const ad::Mask& mask, const ad::BiLstmParams& encoder,
               const ad::DropoutCtx& drop = {});

/// I[c][q] = w . [C_c; Q_q; C_c * Q_q]  (C x Q).
ad::Var interaction(ad::Var context, ad::Var query, const AttentionParams& p);

/// Column c = sum_q a_cq Q_q with a_c = masked_softmax(I_c). Optionally
/// returns a through `weights`.
ad::Var context_to_query(ad::Var interaction, ad::Var query, const ad::Mask& query_mask,
                         ad::Var* weights = nullptr);

/// b = masked_softmax(max over unmasked q of I), c~ = sum_c b_c C_c tiled C times.
ad::Var query_to_context(ad::Var interaction, ad::Var context, const ad::Mask& context_mask,
                         const ad::Mask& query_mask, ad::Var* weights = nullptr);

/// G_c = [C_c; Q~_c; C_c * Q~_c; C_c * C~_c]  (8d x C).
ad::Var fuse_g(ad::Var context, ad::Var attended_query, ad::Var attended_context);

struct AttentionFlow {
  ad::Var g;
  ad::Var interaction;
  ad::Var c2q;
  ad::Var q2c;
  int hop = 1;

  AttentionTrace trace() const;
};

AttentionFlow attention_flow(ad::Var context, ad::Var query, const ad::Mask& context_mask,
                             const ad::Mask& query_mask, const AttentionParams& p, int hop);

/// Zeroes the masked columns of x; returns x untouched when nothing is masked.
ad::Var mask_columns(ad::Var x, const ad::Mask& mask);

}  // namespace rumi
