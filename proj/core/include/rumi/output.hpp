#pragma once

#include <span>

#include "rumi/ad/lstm.hpp"
#include "rumi/ad/params.hpp"
#include "rumi/ad/tape.hpp"
#include "rumi/squad.hpp"

namespace rumi {

struct OutputParams {
  ad::BiLstmParams modeling_first;   // 8d -> d per direction
  ad::BiLstmParams modeling_second;  // 2d -> d per direction
  ad::BiLstmParams end_lstm;         // 2d -> d per direction
  const ad::Parameter* w_start = nullptr;  // 1 x 10d
  const ad::Parameter* w_end = nullptr;    // 1 x 10d
};

OutputParams make_output(ad::ParamStore& store, std::size_t hidden, ad::Rng& rng);

/// Two stacked BiLSTMs over G: 8d x C -> 2d x C.
ad::Var modeling(ad::Var g, const ad::Mask& context_mask, const OutputParams& p,
                 const ad::DropoutCtx& drop = {});

struct SpanDistributions {
  ad::Var start;  // 1 x C
  ad::Var end;    // 1 x C
};

/// p_start = softmax(w_start . [G; M]), p_end = softmax(w_end . [G; BiLSTM(M)]).
SpanDistributions span_distributions(ad::Var g, ad::Var m, const ad::Mask& context_mask,
                                     const OutputParams& p, const ad::DropoutCtx& drop = {});

/// -log p_start[gold.begin] - log p_end[gold.end].
ad::Var nll_loss(ad::Var start, ad::Var end, const Span& gold);

/// Index of the largest entry of a 1 x C distribution, ties to the smallest.
std::size_t argmax(const ad::Tensor& dist);

/// cos(C_s, q) + cos(C_e, q) with q the mean of the unmasked query columns.
/// The indices come from the current distributions and carry no gradient.
ad::Var aqs_loss(ad::Var start, ad::Var end, ad::Var context_enc, ad::Var query_enc,
                 const ad::Mask& query_mask);
/// Same with explicitly pinned boundary indices.
ad::Var aqs_loss_at(std::size_t start_index, std::size_t end_index, ad::Var context_enc,
                    ad::Var query_enc, const ad::Mask& query_mask);

struct LossWeights {
  double l2 = 1e-4;
  double aqsl = 1.0;
};

/// Sum of squares over regularized, trainable parameters (1 x 1).
ad::Var l2_penalty(ad::Tape& tape, const ad::ParamStore& store);

struct ExampleLoss {
  ad::Var nll;
  ad::Var aqsl;
};

struct LossParts {
  ad::Var total;
  ad::Var nll;   // batch mean
  ad::Var l2;    // weighted penalty
  ad::Var aqsl;  // batch mean
};

/// mean NLL + l2 * sum ||W||^2 + aqsl * mean AQSL, all on one tape.
LossParts total_loss(ad::Tape& tape, std::span<const ExampleLoss> examples, const ad::ParamStore& store,
                     const LossWeights& weights);

}  // namespace rumi
