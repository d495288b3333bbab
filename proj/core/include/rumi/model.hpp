#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rumi/ad/lstm.hpp"
#include "rumi/ad/params.hpp"
#include "rumi/ad/tape.hpp"
#include "rumi/attention.hpp"
#include "rumi/batch.hpp"
#include "rumi/embedding.hpp"
#include "rumi/output.hpp"
#include "rumi/ruminate.hpp"

namespace rumi {

struct ModelDims {
  std::size_t hidden = 100;
  std::size_t word_dim = 100;
  std::size_t char_dim = 8;
  std::size_t filters = 100;
  std::size_t filter_width = 5;

  EmbeddingDims embedding() const { return {hidden, word_dim, char_dim, filters, filter_width}; }
};

/// Every parameter group of the reader. Groups a variant does not use are
/// left empty (null pointers / nullopt).
struct ReaderParams {
  EmbeddingParams embedding;
  ad::BiLstmParams encoder;  // shared by context and query
  AttentionParams hop1;
  std::optional<AttentionParams> hop2;
  std::optional<ad::BiLstmParams> summarizer;
  std::optional<GateParams> query_gate;
  std::optional<GateParams> context_gate;
  std::optional<ad::BiLstmParams> query_summary_lstm;
  std::optional<ad::BiLstmParams> context_summary_lstm;
  OutputParams output;
};

ReaderParams make_reader_params(ad::ParamStore& store, const ModelDims& dims, const VariantConfig& variant,
                                ad::Tensor word_table, std::size_t charset_size, ad::Rng& rng);

struct ForwardOptions {
  bool train = false;
  double dropout = 0.0;
  ad::Rng* rng = nullptr;
};

struct ForwardResult {
  ad::Var start;         // 1 x C
  ad::Var end;           // 1 x C
  ad::Var context_enc;   // 2d x C, first-hop encoding
  ad::Var query_enc;     // 2d x Q
  AttentionFlow hop1;
  std::optional<AttentionFlow> hop2;
  std::optional<ad::Var> summary;
  std::optional<ad::Var> query_gate;    // f of the query ruminate layer
  std::optional<ad::Var> context_gate;  // f of the context ruminate layer
};

/// Forward composition for one ablation variant over a fixed parameter set.
class ReaderGraph {
 public:
  ReaderGraph(VariantConfig variant, const ReaderParams& params) : variant_(std::move(variant)), params_(&params) {}

  ForwardResult operator()(ad::Tape& tape, const SequenceInput& context, const SequenceInput& question,
                           const ForwardOptions& opts = {}) const;

  const VariantConfig& variant() const noexcept { return variant_; }

 private:
  VariantConfig variant_;
  const ReaderParams* params_;
};

/// Validates that `params` holds every group the variant needs; throws
/// std::invalid_argument otherwise or for an unknown variant id.
ReaderGraph build_variant(const VariantConfig& variant, const ReaderParams& params);

/// Owns the parameters of one reader instance.
class ReaderModel {
 public:
  ReaderModel(const ModelDims& dims, const VariantConfig& variant, ad::Tensor word_table,
              std::size_t charset_size, std::uint64_t seed);
  ReaderModel(const ReaderModel&) = delete;
  ReaderModel& operator=(const ReaderModel&) = delete;

  ForwardResult forward(ad::Tape& tape, const SequenceInput& context, const SequenceInput& question,
                        const ForwardOptions& opts = {}) const {
    return graph_(tape, context, question, opts);
  }

  ad::ParamStore& params() noexcept { return store_; }
  const ad::ParamStore& params() const noexcept { return store_; }
  const ReaderParams& layout() const noexcept { return *layout_; }
  const VariantConfig& variant() const noexcept { return graph_.variant(); }
  const ModelDims& dims() const noexcept { return dims_; }

 private:
  ModelDims dims_;
  ad::ParamStore store_;
  std::unique_ptr<ReaderParams> layout_;
  ReaderGraph graph_;
};

}  // namespace rumi
