#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rumi/text.hpp"

namespace rumi {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inclusive token span [begin, end] into the context.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

struct QAExample {
  std::string id;
  std::string context;
  std::vector<Token> context_tokens;
  std::string question;
  std::vector<Token> question_tokens;
  std::vector<Span> gold_spans;         // aligned answers, first one is the training target
  std::vector<std::string> gold_texts;  // every annotated answer string (1 to 3)

  /// Context text covered by a token span, cut from the original characters.
  std::string span_text(const Span& span) const;
};

struct LoadStats {
  std::size_t questions = 0;
  std::size_t loaded = 0;
  std::size_t dropped = 0;           // no answer could be aligned
  std::size_t unaligned_answers = 0;
};

/// Smallest token span whose bytes cover [start, start + length). Returns
/// nullopt when no token overlaps the range.
std::optional<Span> align_answer(std::size_t start, std::size_t length,
                                 const std::vector<Token>& tokens);

/// Parses SQuAD v1.1 JSON (data -> paragraphs -> qas -> answers). Malformed
/// JSON raises DataError naming the line. With require_answers false,
/// questions without an aligned answer are kept (for prediction input).
std::vector<QAExample> parse_squad(std::string_view json, LoadStats* stats = nullptr,
                                   bool require_answers = true);
std::vector<QAExample> load_squad(const std::filesystem::path& path, LoadStats* stats = nullptr,
                                  bool require_answers = true);

}  // namespace rumi
