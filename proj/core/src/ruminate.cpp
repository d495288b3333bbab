#include "rumi/ruminate.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "rumi/attention.hpp"

namespace rumi {

using ad::Tensor;
using ad::Var;

VariantConfig VariantConfig::from_id(int id) {
  if (id < 0 || id > kCount) throw std::invalid_argument("unknown variant id " + std::to_string(id));
  VariantConfig v;
  v.id = id;
  switch (id) {
    case 0:
      v.description = "Full model";
      break;
    case 1:
      v.description = "BiDAF";
      v.second_hop = v.query_ruminate = v.context_ruminate = false;
      v.l2 = v.aqsl = v.local_search = false;
      break;
    case 2:
      v.description = "BiDAF w/ L2 Reg., AQSL, LS";
      v.second_hop = v.query_ruminate = v.context_ruminate = false;
      break;
    case 3:
      v.description = "Full model w/o query ruminate layer";
      v.query_ruminate = false;
      break;
    case 4:
      v.description = "Full model w/o context ruminate layer";
      v.context_ruminate = false;
      break;
    case 5:
      v.description = "Full model w/ BiLSTM in QRL";
      v.query_bilstm = true;
      break;
    case 6:
      v.description = "Full model w/o BiLSTM in CRL";
      v.context_bilstm = false;
      break;
    case 7:
      v.description = "Full model w/o query input at z,f in QRL";
      v.query_gate.encoding_input = false;
      break;
    case 8:
      v.description = "Full model w/o context input at z,f in CRL";
      v.context_gate.encoding_input = false;
      break;
    case 9:
      v.description = "Full model w/o query input in QRL";
      v.query_gate.encoding_input = false;
      v.query_gate.encoding_term = false;
      break;
    case 10:
      v.description = "Full model w/o context input in CRL";
      v.context_gate.encoding_input = false;
      v.context_gate.encoding_term = false;
      break;
    case 11:
      v.description = "Full model w/o summ. input in QRL";
      v.query_gate.summary_input = false;
      break;
    case 12:
      v.description = "Full model w/o summ. input in CRL";
      v.context_gate.summary_input = false;
      break;
  }
  return v;
}

VariantConfig VariantConfig::parse(std::string_view text) {
  if (text == "full") return from_id(kFull);
  int id = -1;
  try {
    std::size_t used = 0;
    id = std::stoi(std::string(text), &used);
    if (used != text.size()) id = -1;
  } catch (const std::exception&) {
    id = -1;
  }
  if (id < 1 || id > kCount) throw std::invalid_argument("unknown variant '" + std::string(text) + "'");
  return from_id(id);
}

std::string VariantConfig::name() const { return id == kFull ? "full" : std::to_string(id); }

std::vector<VariantConfig> all_variants() {
  std::vector<VariantConfig> out;
  for (int id = 1; id <= VariantConfig::kCount; ++id) out.push_back(VariantConfig::from_id(id));
  out.push_back(VariantConfig::from_id(VariantConfig::kFull));
  return out;
}

GateParams make_gate(ad::ParamStore& store, const std::string& prefix, std::size_t dim,
                     const GateSwitches& switches, ad::Rng& rng) {
  GateParams p;
  if (switches.summary_input) {
    p.w1z = &store.add(prefix + ".w1z", ad::xavier_uniform(dim, dim, rng), false, true);
    p.w1f = &store.add(prefix + ".w1f", ad::xavier_uniform(dim, dim, rng), false, true);
  }
  if (switches.encoding_input) {
    p.w2z = &store.add(prefix + ".w2z", ad::xavier_uniform(dim, dim, rng), false, true);
    p.w2f = &store.add(prefix + ".w2f", ad::xavier_uniform(dim, dim, rng), false, true);
  }
  p.bz = &store.add(prefix + ".bz", Tensor::matrix(dim, 1));
  p.bf = &store.add(prefix + ".bf", Tensor::matrix(dim, 1));
  return p;
}

namespace {

Var affine(ad::Tape& tape, const ad::Parameter* w1, Var summary, const ad::Parameter* w2, Var encoding,
           const ad::Parameter* bias, const GateSwitches& switches) {
  Var acc = ad::tile_column(tape.param(*bias), encoding.cols());
  if (switches.summary_input) {
    if (!w1) throw std::invalid_argument("gate: summary weights missing");
    acc = ad::add(ad::matmul(tape.param(*w1), summary), acc);
  }
  if (switches.encoding_input) {
    if (!w2) throw std::invalid_argument("gate: encoding weights missing");
    acc = ad::add(ad::matmul(tape.param(*w2), encoding), acc);
  }
  return acc;
}

}  // namespace

GateOutput apply_gate(Var summary_tiled, Var encoding, const GateParams& p, const GateSwitches& switches) {
  ad::Tape& tape = *encoding.tape;
  Var z = ad::tanh(affine(tape, p.w1z, summary_tiled, p.w2z, encoding, p.bz, switches));
  Var f = ad::sigmoid(affine(tape, p.w1f, summary_tiled, p.w2f, encoding, p.bf, switches));
  if (switches.encoding_term) return {ad::lerp(f, encoding, z), f};
  Var ones = tape.constant(Tensor(f.value().shape(), 1.0));
  return {ad::mul(ad::add(ones, ad::scale(f, -1.0)), z), f};
}

Var summarize(Var g, const ad::Mask& context_mask, const ad::BiLstmParams& summarizer,
              const ad::DropoutCtx& drop) {
  auto run = ad::run_bilstm(g, context_mask, summarizer, drop);
  const std::array<Var, 2> parts{run.forward_h, run.backward_h};
  return ad::concat(parts, 0);
}

namespace {

GateOutput ruminate(Var encoding, Var summary, const ad::Mask& mask, const GateParams& gate,
                    const GateSwitches& switches, const ad::BiLstmParams* summary_lstm,
                    const ad::DropoutCtx& drop) {
  if (summary.rows() != encoding.rows() || summary.cols() != 1)
    throw ad::ShapeError("ruminate: summary " + ad::shape_string(summary.value().shape()) +
                         " does not match encoding rows " + std::to_string(encoding.rows()));
  Var tiled = ad::tile_column(summary, encoding.cols());
  if (summary_lstm) tiled = ad::run_bilstm(tiled, mask, *summary_lstm, drop).outputs;
  GateOutput out = apply_gate(tiled, encoding, gate, switches);
  out.out = mask_columns(out.out, mask);
  return out;
}

}  // namespace

GateOutput query_ruminate(Var query_enc, Var summary, const ad::Mask& query_mask, const GateParams& gate,
                          const GateSwitches& switches, const ad::BiLstmParams* summary_lstm,
                          const ad::DropoutCtx& drop) {
  return ruminate(query_enc, summary, query_mask, gate, switches, summary_lstm, drop);
}

GateOutput context_ruminate(Var context_enc, Var summary, const ad::Mask& context_mask,
                            const GateParams& gate, const GateSwitches& switches,
                            const ad::BiLstmParams* summary_lstm, const ad::DropoutCtx& drop) {
  return ruminate(context_enc, summary, context_mask, gate, switches, summary_lstm, drop);
}

std::vector<double> gate_norms(const Tensor& gate) {
  std::vector<double> out(gate.cols(), 0.0);
  for (std::size_t j = 0; j < gate.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < gate.rows(); ++i) s += gate.at(i, j) * gate.at(i, j);
    out[j] = std::sqrt(s);
  }
  return out;
}

}  // namespace rumi
