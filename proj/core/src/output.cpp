#include "rumi/output.hpp"

#include <array>
#include <stdexcept>

namespace rumi {

using ad::Tensor;
using ad::Var;

OutputParams make_output(ad::ParamStore& store, std::size_t hidden, ad::Rng& rng) {
  OutputParams p;
  p.modeling_first = ad::make_bilstm(store, "model1", 8 * hidden, hidden, rng);
  p.modeling_second = ad::make_bilstm(store, "model2", 2 * hidden, hidden, rng);
  p.end_lstm = ad::make_bilstm(store, "end", 2 * hidden, hidden, rng);
  p.w_start = &store.add("out.w_start", ad::xavier_uniform(1, 10 * hidden, rng), false, true);
  p.w_end = &store.add("out.w_end", ad::xavier_uniform(1, 10 * hidden, rng), false, true);
  return p;
}

Var modeling(Var g, const ad::Mask& context_mask, const OutputParams& p, const ad::DropoutCtx& drop) {
  Var first = ad::run_bilstm(g, context_mask, p.modeling_first, drop).outputs;
  return ad::run_bilstm(first, context_mask, p.modeling_second, drop).outputs;
}

SpanDistributions span_distributions(Var g, Var m, const ad::Mask& context_mask, const OutputParams& p,
                                     const ad::DropoutCtx& drop) {
  ad::Tape& tape = *g.tape;
  const std::array<Var, 2> start_parts{g, m};
  Var start_in = drop.apply(ad::concat(start_parts, 0));
  if (start_in.rows() != p.w_start->value.cols())
    throw ad::ShapeError("span_distributions: [G; M] has " + std::to_string(start_in.rows()) +
                         " rows, w_start expects " + std::to_string(p.w_start->value.cols()));
  Var start = ad::masked_softmax(ad::matmul(tape.param(*p.w_start), start_in), context_mask, 1);

  Var m_end = ad::run_bilstm(m, context_mask, p.end_lstm, drop).outputs;
  const std::array<Var, 2> end_parts{g, m_end};
  Var end_in = drop.apply(ad::concat(end_parts, 0));
  Var end = ad::masked_softmax(ad::matmul(tape.param(*p.w_end), end_in), context_mask, 1);
  return {start, end};
}

Var nll_loss(Var start, Var end, const Span& gold) {
  if (gold.begin > gold.end || gold.end >= start.cols())
    throw std::out_of_range("nll_loss: gold span outside context");
  Var ps = ad::slice_column(start, gold.begin);
  Var pe = ad::slice_column(end, gold.end);
  return ad::scale(ad::add(ad::log(ps), ad::log(pe)), -1.0);
}

std::size_t argmax(const Tensor& dist) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < dist.size(); ++i)
    if (dist[i] > dist[best]) best = i;
  return best;
}

Var aqs_loss_at(std::size_t start_index, std::size_t end_index, Var context_enc, Var query_enc,
                const ad::Mask& query_mask) {
  ad::Tape& tape = *context_enc.tape;
  const std::size_t q_len = query_enc.cols();
  if (query_mask.size() != q_len) throw ad::ShapeError("aqs_loss: query mask length mismatch");
  std::size_t valid = 0;
  for (auto m : query_mask) valid += m ? 1 : 0;
  if (valid == 0) throw ad::ShapeError("aqs_loss: empty query");
  Tensor weights = Tensor::matrix(q_len, 1);
  for (std::size_t q = 0; q < q_len; ++q) weights[q] = query_mask[q] ? 1.0 / static_cast<double>(valid) : 0.0;
  Var bag = ad::matmul(query_enc, tape.constant(std::move(weights)));
  Var cs = ad::slice_column(context_enc, start_index);
  Var ce = ad::slice_column(context_enc, end_index);
  return ad::add(ad::cosine_similarity(cs, bag), ad::cosine_similarity(ce, bag));
}

Var aqs_loss(Var start, Var end, Var context_enc, Var query_enc, const ad::Mask& query_mask) {
  return aqs_loss_at(argmax(start.value()), argmax(end.value()), context_enc, query_enc, query_mask);
}

Var l2_penalty(ad::Tape& tape, const ad::ParamStore& store) {
  Var total = tape.constant(Tensor::scalar(0.0));
  for (const ad::Parameter* p : store.all()) {
    if (!p->regularized || p->frozen) continue;
    Var w = tape.param(*p);
    total = ad::add(total, ad::sum(ad::mul(w, w)));
  }
  return total;
}

LossParts total_loss(ad::Tape& tape, std::span<const ExampleLoss> examples, const ad::ParamStore& store,
                     const LossWeights& weights) {
  if (examples.empty()) throw std::invalid_argument("total_loss: empty batch");
  const double inv = 1.0 / static_cast<double>(examples.size());
  Var nll = examples[0].nll;
  Var aqsl = examples[0].aqsl;
  for (std::size_t i = 1; i < examples.size(); ++i) {
    nll = ad::add(nll, examples[i].nll);
    aqsl = ad::add(aqsl, examples[i].aqsl);
  }
  LossParts parts;
  parts.nll = ad::scale(nll, inv);
  parts.aqsl = ad::scale(aqsl, inv);
  parts.l2 = ad::scale(l2_penalty(tape, store), weights.l2);
  parts.total = ad::add(ad::add(parts.nll, parts.l2), ad::scale(parts.aqsl, weights.aqsl));
  return parts;
}

}  // namespace rumi
