#pragma once

#include <array>
#include <span>

#include "rumi/ad/lstm.hpp"
#include "rumi/ad/params.hpp"
#include "rumi/ad/tape.hpp"
#include "rumi/batch.hpp"

namespace rumi {

struct EmbeddingDims {
  std::size_t hidden = 100;    // d
  std::size_t word_dim = 100;
  std::size_t char_dim = 8;
  std::size_t filters = 100;   // f
  std::size_t filter_width = 5;
};

/// Character table (|charset| x e) and f filters of the given width over it.
struct CharConvParams {
  const ad::Parameter* table = nullptr;
  const ad::Parameter* filters = nullptr;  // f x (e * width)
  const ad::Parameter* bias = nullptr;     // f x 1
  std::size_t width = 5;
};

/// y = t * relu(Wh x + bh) + (1 - t) * x with t = sigmoid(Wt x + bt).
struct HighwayLayer {
  const ad::Parameter* wh = nullptr;
  const ad::Parameter* bh = nullptr;
  const ad::Parameter* wt = nullptr;
  const ad::Parameter* bt = nullptr;
};

struct EmbeddingParams {
  const ad::Parameter* words = nullptr;       // frozen |V| x word_dim
  CharConvParams chars;
  const ad::Parameter* projection = nullptr;  // d x (word_dim + f); null when word_dim + f == d
  std::array<HighwayLayer, 2> highway;
  std::size_t hidden = 0;
};

EmbeddingParams make_embedding(ad::ParamStore& store, const EmbeddingDims& dims, ad::Tensor word_table,
                               std::size_t charset_size, ad::Rng& rng);

/// Conv over the character embeddings, relu, then max over time: f x 1.
/// Words shorter than the filter are right-padded with char-PAD.
ad::Var char_embed(ad::Tape& tape, const CharConvParams& p, std::span<const std::size_t> char_ids,
                   const ad::DropoutCtx& drop = {});

ad::Var highway(ad::Var x, const HighwayLayer& layer);

/// concat(word vector, char vector) per token, projected to d if needed,
/// then two highway layers: d x len.
ad::Var embed_sequence(ad::Tape& tape, const EmbeddingParams& p, const SequenceInput& seq,
                       const ad::DropoutCtx& drop = {});

}  // namespace rumi
