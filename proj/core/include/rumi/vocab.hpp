#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rumi/ad/tensor.hpp"
#include "rumi/squad.hpp"

namespace rumi {

/// Lower-cased word vocabulary. Id 0 is the UNK symbol.
class Vocab {
 public:
  static constexpr std::size_t kUnk = 0;

  Vocab();
  static Vocab build(const std::vector<QAExample>& examples);
  static Vocab from_tokens(const std::vector<std::string>& tokens);

  std::size_t add(std::string_view token);
  std::size_t id_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

/// Characters seen in training text. Id 0 is char-UNK, id 1 is char-PAD.
class Charset {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::size_t kPad = 1;

  Charset();
  static Charset build(const std::vector<QAExample>& examples);
  static Charset from_codepoints(const std::vector<char32_t>& cps);

  std::size_t add(char32_t cp);
  std::size_t id_of(char32_t cp) const;
  std::vector<std::size_t> encode(std::string_view word, std::size_t max_len) const;
  std::size_t size() const noexcept { return chars_.size(); }
  const std::vector<char32_t>& codepoints() const noexcept { return chars_; }

 private:
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, std::size_t> ids_;
};

/// Frozen |V| x dim word-vector table.
struct EmbeddingTable {
  ad::Tensor matrix;
  std::vector<std::uint8_t> found;  // 1 where the row came from the vector file
  bool frozen = true;
};

struct GloveStats {
  std::size_t lines = 0;
  std::size_t loaded = 0;
  std::size_t malformed = 0;
};

/// Reads "token v1 ... v_dim" lines. Tokens outside the vocabulary are
/// ignored, malformed lines are skipped and counted, vocabulary entries
/// with no line keep a zero row.
EmbeddingTable load_glove(const std::filesystem::path& path, const Vocab& vocab,
                          std::size_t dim = 100, GloveStats* stats = nullptr);

/// Writes the table in the same text format with round-trip exact decimals.
/// Rows whose `found` flag is 0 are not written.
void save_glove(const std::filesystem::path& path, const Vocab& vocab, const EmbeddingTable& table);

}  // namespace rumi
