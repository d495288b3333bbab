#include "rumi/model.hpp"

#include <stdexcept>

namespace rumi {

using ad::Var;

ReaderParams make_reader_params(ad::ParamStore& store, const ModelDims& dims, const VariantConfig& variant,
                                ad::Tensor word_table, std::size_t charset_size, ad::Rng& rng) {
  const std::size_t d = dims.hidden;
  ReaderParams p;
  p.embedding = make_embedding(store, dims.embedding(), std::move(word_table), charset_size, rng);
  p.encoder = ad::make_bilstm(store, "encoder", d, d, rng);
  p.hop1 = make_attention(store, "hop1", d, rng);
  if (variant.second_hop) {
    p.summarizer = ad::make_bilstm(store, "summary", 8 * d, d, rng);
    if (variant.query_ruminate) {
      p.query_gate = make_gate(store, "qrl.gate", 2 * d, variant.query_gate, rng);
      // A gate that ignores the summary makes its BiLSTM dead weight.
      if (variant.query_bilstm && variant.query_gate.summary_input)
        p.query_summary_lstm = ad::make_bilstm(store, "qrl.lstm", 2 * d, d, rng);
    }
    if (variant.context_ruminate) {
      p.context_gate = make_gate(store, "crl.gate", 2 * d, variant.context_gate, rng);
      if (variant.context_bilstm && variant.context_gate.summary_input)
        p.context_summary_lstm = ad::make_bilstm(store, "crl.lstm", 2 * d, d, rng);
    }
    p.hop2 = make_attention(store, "hop2", d, rng);
  }
  p.output = make_output(store, d, rng);
  return p;
}

ReaderGraph build_variant(const VariantConfig& variant, const ReaderParams& params) {
  const VariantConfig checked = VariantConfig::from_id(variant.id);
  (void)checked;
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("build_variant: missing parameters for ") + what);
  };
  if (variant.second_hop) {
    need(params.summarizer.has_value(), "summarizer");
    need(params.hop2.has_value(), "second-hop attention");
    if (variant.query_ruminate) {
      need(params.query_gate.has_value(), "query gate");
      if (variant.query_bilstm && variant.query_gate.summary_input) need(params.query_summary_lstm.has_value(), "query summary BiLSTM");
    }
    if (variant.context_ruminate) {
      need(params.context_gate.has_value(), "context gate");
      if (variant.context_bilstm && variant.context_gate.summary_input) need(params.context_summary_lstm.has_value(), "context summary BiLSTM");
    }
  }
  return ReaderGraph(variant, params);
}

ForwardResult ReaderGraph::operator()(ad::Tape& tape, const SequenceInput& context,
                                      const SequenceInput& question, const ForwardOptions& opts) const {
  const ReaderParams& p = *params_;
  const ad::DropoutCtx drop{opts.dropout, opts.train, opts.rng};
  const ad::Mask& cmask = context.mask;
  const ad::Mask& qmask = question.mask;

  ForwardResult r;
  Var h = embed_sequence(tape, p.embedding, context, drop);
  Var u = embed_sequence(tape, p.embedding, question, drop);
  r.context_enc = encode(h, cmask, p.encoder, drop);
  r.query_enc = encode(u, qmask, p.encoder, drop);
  r.hop1 = attention_flow(r.context_enc, r.query_enc, cmask, qmask, p.hop1, 1);

  Var g = r.hop1.g;
  if (variant_.second_hop) {
    Var s = summarize(r.hop1.g, cmask, *p.summarizer, drop);
    r.summary = s;
    Var query = r.query_enc;
    Var ctx = r.context_enc;
    if (variant_.query_ruminate) {
      auto q = query_ruminate(r.query_enc, s, qmask, *p.query_gate, variant_.query_gate,
                              p.query_summary_lstm ? &*p.query_summary_lstm : nullptr, drop);
      query = q.out;
      r.query_gate = q.gate;
    }
    if (variant_.context_ruminate) {
      auto c = context_ruminate(r.context_enc, s, cmask, *p.context_gate, variant_.context_gate,
                                p.context_summary_lstm ? &*p.context_summary_lstm : nullptr, drop);
      ctx = c.out;
      r.context_gate = c.gate;
    }
    r.hop2 = attention_flow(ctx, query, cmask, qmask, *p.hop2, 2);
    g = r.hop2->g;
  }

  Var m = modeling(g, cmask, p.output, drop);
  auto dists = span_distributions(g, m, cmask, p.output, drop);
  r.start = dists.start;
  r.end = dists.end;
  return r;
}

ReaderModel::ReaderModel(const ModelDims& dims, const VariantConfig& variant, ad::Tensor word_table,
                         std::size_t charset_size, std::uint64_t seed)
    : dims_(dims),
      layout_(std::make_unique<ReaderParams>()),
      graph_(variant, *layout_) {
  ad::Rng rng = ad::Rng::derive(seed, 0);
  *layout_ = make_reader_params(store_, dims, variant, std::move(word_table), charset_size, rng);
  graph_ = build_variant(variant, *layout_);
}

}  // namespace rumi
