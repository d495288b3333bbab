#include "rumi/attention.hpp"

#include <algorithm>
#include <array>
#include <memory>

namespace rumi {

using ad::Tensor;
using ad::Var;

AttentionParams make_attention(ad::ParamStore& store, const std::string& prefix, std::size_t hidden,
                               ad::Rng& rng) {
  return {&store.add(prefix + ".w", ad::xavier_uniform(1, 6 * hidden, rng), false, true), hidden};
}

Var mask_columns(Var x, const ad::Mask& mask) {
  if (std::all_of(mask.begin(), mask.end(), [](auto m) { return m != 0; })) return x;
  Tensor keep = Tensor::matrix(x.rows(), x.cols());
  for (std::size_t i = 0; i < keep.rows(); ++i)
    for (std::size_t j = 0; j < keep.cols(); ++j) keep.at(i, j) = mask[j] ? 1.0 : 0.0;
  return ad::mul(x, x.tape->constant(std::move(keep)));
}

Var encode(Var x, const ad::Mask& mask, const ad::BiLstmParams& encoder, const ad::DropoutCtx& drop) {
  return ad::run_bilstm(x, mask, encoder, drop).outputs;
}

Var interaction(Var context, Var query, const AttentionParams& p) {
  ad::Tape& tape = *context.tape;
  const std::size_t two_d = 2 * p.hidden;
  if (context.rows() != two_d || query.rows() != two_d)
    throw ad::ShapeError("interaction: encodings must have " + std::to_string(two_d) + " rows, got " +
                         std::to_string(context.rows()) + " and " + std::to_string(query.rows()));
  if (p.w->value.cols() != 3 * two_d)
    throw ad::ShapeError("interaction: w_I must have length 6d = " + std::to_string(3 * two_d));
  const std::size_t c_len = context.cols();
  const std::size_t q_len = query.cols();
  Var w = tape.param(*p.w);
  Var w_c = ad::slice(w, 1, 0, two_d);
  Var w_q = ad::slice(w, 1, two_d, 2 * two_d);
  Var w_cq = ad::slice(w, 1, 2 * two_d, 3 * two_d);

  Var from_context = ad::tile(ad::transpose(ad::matmul(w_c, context)), 1, q_len);  // C x Q
  Var from_query = ad::tile(ad::matmul(w_q, query), 0, c_len);                     // C x Q
  Var weighted = ad::mul(context, ad::tile(ad::transpose(w_cq), 1, c_len));        // 2d x C
  Var joint = ad::matmul(ad::transpose(weighted), query);                          // C x Q
  return ad::add(ad::add(from_context, from_query), joint);
}

Var context_to_query(Var interaction, Var query, const ad::Mask& query_mask, Var* weights) {
  Var a = ad::masked_softmax(interaction, query_mask, 1);
  if (weights) *weights = a;
  return ad::matmul(query, ad::transpose(a));
}

Var query_to_context(Var interaction, Var context, const ad::Mask& context_mask,
                     const ad::Mask& query_mask, Var* weights) {
  Var row_max = ad::max(interaction, 1, std::make_shared<const ad::Mask>(query_mask));
  Var b = ad::masked_softmax(row_max, context_mask, 0);
  if (weights) *weights = b;
  return ad::tile_column(ad::matmul(context, b), context.cols());
}

Var fuse_g(Var context, Var attended_query, Var attended_context) {
  const std::array<Var, 4> blocks{context, attended_query, ad::mul(context, attended_query),
                                  ad::mul(context, attended_context)};
  return ad::concat(blocks, 0);
}

AttentionTrace AttentionFlow::trace() const {
  return {interaction.value(), c2q.value(), q2c.value(), hop};
}

AttentionFlow attention_flow(Var context, Var query, const ad::Mask& context_mask,
                             const ad::Mask& query_mask, const AttentionParams& p, int hop) {
  if (hop != 1 && hop != 2) throw std::invalid_argument("attention_flow: hop must be 1 or 2");
  AttentionFlow out;
  out.hop = hop;
  out.interaction = interaction(context, query, p);
  Var attended_query = context_to_query(out.interaction, query, query_mask, &out.c2q);
  Var attended_context = query_to_context(out.interaction, context, context_mask, query_mask, &out.q2c);
  out.g = fuse_g(context, attended_query, attended_context);
  return out;
}

}  // namespace rumi
