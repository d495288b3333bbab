#include "rumi/embedding.hpp"

#include <stdexcept>

namespace rumi {

using ad::Tensor;
using ad::Var;

EmbeddingParams make_embedding(ad::ParamStore& store, const EmbeddingDims& dims, Tensor word_table,
                               std::size_t charset_size, ad::Rng& rng) {
  if (word_table.cols() != dims.word_dim)
    throw ad::ShapeError("embedding: word table has " + std::to_string(word_table.cols()) +
                         " columns, expected " + std::to_string(dims.word_dim));
  EmbeddingParams p;
  p.hidden = dims.hidden;
  p.words = &store.add("embed.words", std::move(word_table), /*frozen=*/true, /*regularized=*/false);
  p.chars.width = dims.filter_width;
  p.chars.table = &store.add("embed.chars", ad::xavier_uniform(charset_size, dims.char_dim, rng), false, true);
  p.chars.filters = &store.add("embed.conv.w",
                               ad::xavier_uniform(dims.filters, dims.char_dim * dims.filter_width, rng), false, true);
  p.chars.bias = &store.add("embed.conv.b", Tensor::matrix(dims.filters, 1));
  const std::size_t joined = dims.word_dim + dims.filters;
  if (joined != dims.hidden)
    p.projection = &store.add("embed.proj", ad::xavier_uniform(dims.hidden, joined, rng), false, true);
  for (std::size_t l = 0; l < p.highway.size(); ++l) {
    const std::string prefix = "embed.highway" + std::to_string(l);
    p.highway[l].wh = &store.add(prefix + ".wh", ad::xavier_uniform(dims.hidden, dims.hidden, rng), false, true);
    p.highway[l].bh = &store.add(prefix + ".bh", Tensor::matrix(dims.hidden, 1));
    p.highway[l].wt = &store.add(prefix + ".wt", ad::xavier_uniform(dims.hidden, dims.hidden, rng), false, true);
    p.highway[l].bt = &store.add(prefix + ".bt", Tensor::matrix(dims.hidden, 1));
  }
  return p;
}

Var char_embed(ad::Tape& tape, const CharConvParams& p, std::span<const std::size_t> char_ids,
               const ad::DropoutCtx& drop) {
  std::vector<std::size_t> ids(char_ids.begin(), char_ids.end());
  if (ids.size() < p.width) ids.resize(p.width, Charset::kPad);
  Var x = drop.apply(ad::gather_columns(tape.param(*p.table), ids));
  Var conv = ad::conv1d(x, tape.param(*p.filters), tape.param(*p.bias), p.width);
  return ad::max_pool_over_time(ad::relu(conv));
}

Var highway(Var x, const HighwayLayer& layer) {
  ad::Tape& tape = *x.tape;
  const std::size_t n = x.cols();
  Var t = ad::sigmoid(ad::add(ad::matmul(tape.param(*layer.wt), x), ad::tile_column(tape.param(*layer.bt), n)));
  Var g = ad::relu(ad::add(ad::matmul(tape.param(*layer.wh), x), ad::tile_column(tape.param(*layer.bh), n)));
  return ad::lerp(t, g, x);
}

Var embed_sequence(ad::Tape& tape, const EmbeddingParams& p, const SequenceInput& seq,
                   const ad::DropoutCtx& drop) {
  if (seq.length() == 0) throw std::invalid_argument("embed_sequence: empty token list");
  Var words = ad::gather_columns(tape.param(*p.words), seq.word_ids);
  std::vector<Var> chars;
  chars.reserve(seq.length());
  for (const auto& ids : seq.char_ids) chars.push_back(char_embed(tape, p.chars, ids, drop));
  const std::array<Var, 2> parts{words, ad::concat(chars, 1)};
  Var x = ad::concat(parts, 0);
  if (p.projection) x = ad::matmul(tape.param(*p.projection), x);
  x = drop.apply(x);
  for (const auto& layer : p.highway) x = highway(x, layer);
  return x;
}

}  // namespace rumi
