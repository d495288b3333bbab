#include "rumi/batch.hpp"

#include <algorithm>
#include <numeric>

namespace rumi {

std::size_t SequenceInput::valid_length() const noexcept {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto m) { return m != 0; }));
}

SequenceInput encode_sequence(const std::vector<Token>& tokens, const Vocab& vocab,
                              const Charset& chars, std::size_t max_word_len) {
  SequenceInput seq;
  for (const auto& t : tokens) {
    seq.word_ids.push_back(vocab.id_of(t.text));
    seq.char_ids.push_back(chars.encode(t.text, max_word_len));
    seq.mask.push_back(1);
  }
  return seq;
}

std::optional<EncodedExample> encode_example(const QAExample& ex, const Vocab& vocab,
                                             const Charset& chars, const EncodeOptions& opts) {
  EncodedExample out;
  out.source = &ex;
  out.gold = ex.gold_spans.front();
  auto ctx_tokens = ex.context_tokens;
  if (opts.max_context_len > 0 && ctx_tokens.size() > opts.max_context_len) {
    if (out.gold.end >= opts.max_context_len) return std::nullopt;
    ctx_tokens.resize(opts.max_context_len);
  }
  out.context = encode_sequence(ctx_tokens, vocab, chars, opts.max_word_len);
  out.question = encode_sequence(ex.question_tokens, vocab, chars, opts.max_word_len);
  return out;
}

namespace {
SequenceInput pad(const SequenceInput& seq, std::size_t len) {
  SequenceInput out = seq;
  out.word_ids.resize(len, Vocab::kUnk);
  out.char_ids.resize(len, std::vector<std::size_t>{Charset::kPad});
  out.mask.resize(len, 0);
  return out;
}

SequenceInput strip(const SequenceInput& seq) {
  SequenceInput out;
  for (std::size_t i = 0; i < seq.length(); ++i) {
    if (!seq.mask[i]) continue;
    out.word_ids.push_back(seq.word_ids[i]);
    out.char_ids.push_back(seq.char_ids[i]);
    out.mask.push_back(1);
  }
  return out;
}
}  // namespace

Batch make_batch(const std::vector<const EncodedExample*>& examples) {
  Batch b;
  std::size_t max_c = 0, max_q = 0;
  for (const auto* ex : examples) {
    max_c = std::max(max_c, ex->context.length());
    max_q = std::max(max_q, ex->question.length());
  }
  for (const auto* ex : examples) {
    b.context.push_back(pad(ex->context, max_c));
    b.question.push_back(pad(ex->question, max_q));
    b.gold.push_back(ex->gold);
    b.examples.push_back(ex->source);
  }
  return b;
}

Batch make_batch(const std::vector<EncodedExample>& examples) {
  std::vector<const EncodedExample*> ptrs;
  for (const auto& ex : examples) ptrs.push_back(&ex);
  return make_batch(ptrs);
}

std::vector<EncodedExample> unbatch(const Batch& batch) {
  std::vector<EncodedExample> out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.push_back({strip(batch.context[i]), strip(batch.question[i]), batch.gold[i], batch.examples[i]});
  }
  return out;
}

std::vector<std::vector<std::size_t>> bucket_batches(const std::vector<EncodedExample>& examples,
                                                     std::size_t batch_size, ad::Rng& rng) {
  if (batch_size == 0) throw DataError("batch size must be positive");
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  // Shuffle first so equal lengths land in random buckets, then stable-sort.
  std::shuffle(order.begin(), order.end(), rng.engine());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return examples[a].context.length() < examples[b].context.length();
  });
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size)
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch_size)));
  std::shuffle(batches.begin(), batches.end(), rng.engine());
  return batches;
}

}  // namespace rumi
