#pragma once

#include <optional>
#include <vector>

#include "rumi/ad/params.hpp"
#include "rumi/ad/tape.hpp"
#include "rumi/squad.hpp"
#include "rumi/vocab.hpp"

namespace rumi {

/// Token ids for one sequence, possibly padded at the end.
struct SequenceInput {
  std::vector<std::size_t> word_ids;
  std::vector<std::vector<std::size_t>> char_ids;
  ad::Mask mask;

  std::size_t length() const noexcept { return word_ids.size(); }
  std::size_t valid_length() const noexcept;
  bool operator==(const SequenceInput&) const = default;
};

struct EncodedExample {
  SequenceInput context;
  SequenceInput question;
  Span gold;
  const QAExample* source = nullptr;
};

struct EncodeOptions {
  std::size_t max_word_len = 16;
  std::size_t max_context_len = 0;  // 0 keeps every token
};

SequenceInput encode_sequence(const std::vector<Token>& tokens, const Vocab& vocab,
                              const Charset& chars, std::size_t max_word_len);

/// nullopt when context truncation cuts off the gold span.
std::optional<EncodedExample> encode_example(const QAExample& ex, const Vocab& vocab,
                                             const Charset& chars, const EncodeOptions& opts);

struct Batch {
  std::vector<SequenceInput> context;
  std::vector<SequenceInput> question;
  std::vector<Span> gold;
  std::vector<const QAExample*> examples;

  std::size_t size() const noexcept { return context.size(); }
};

/// Pads every sequence to the batch maximum with UNK words, PAD characters
/// and a false mask bit.
Batch make_batch(const std::vector<const EncodedExample*>& examples);
Batch make_batch(const std::vector<EncodedExample>& examples);

/// Inverse of make_batch: strips padding using the masks.
std::vector<EncodedExample> unbatch(const Batch& batch);

/// Groups example indices into batches of `batch_size`: indices are sorted
/// by context length, cut into batches, and the batch order is shuffled.
std::vector<std::vector<std::size_t>> bucket_batches(const std::vector<EncodedExample>& examples,
                                                     std::size_t batch_size, ad::Rng& rng);

}  // namespace rumi
