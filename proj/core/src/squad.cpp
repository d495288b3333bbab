#include "rumi/squad.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rumi {

std::string QAExample::span_text(const Span& span) const {
  const std::size_t b = context_tokens.at(span.begin).begin;
  const std::size_t e = context_tokens.at(span.end).end;
  return context.substr(b, e - b);
}

std::optional<Span> align_answer(std::size_t start, std::size_t length,
                                 const std::vector<Token>& tokens) {
  const std::size_t stop = start + std::max<std::size_t>(length, 1);
  std::optional<std::size_t> first;
  std::size_t last = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].end <= start || tokens[i].begin >= stop) continue;
    if (!first) first = i;
    last = i;
  }
  if (!first) return std::nullopt;
  return Span{*first, last};
}

namespace {

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

const nlohmann::json& field(const nlohmann::json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    throw DataError(std::string("squad: missing field '") + key + "'");
  return obj.at(key);
}

}  // namespace

std::vector<QAExample> parse_squad(std::string_view json, LoadStats* stats, bool require_answers) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("squad: malformed JSON at line " + std::to_string(line_of(json, e.byte)) + ": " +
                    e.what());
  }

  LoadStats local;
  std::vector<QAExample> out;
  try {
    for (const auto& article : field(doc, "data")) {
      for (const auto& paragraph : field(article, "paragraphs")) {
        const std::string context = field(paragraph, "context").get<std::string>();
        const auto context_tokens = tokenize(context);
        const auto cps = decode_utf8(context);
        for (const auto& qa : field(paragraph, "qas")) {
          ++local.questions;
          QAExample ex;
          ex.id = field(qa, "id").get<std::string>();
          ex.context = context;
          ex.context_tokens = context_tokens;
          ex.question = field(qa, "question").get<std::string>();
          ex.question_tokens = tokenize(ex.question);
          const nlohmann::json no_answers = nlohmann::json::array();
          const auto& answers = require_answers || qa.contains("answers") ? field(qa, "answers") : no_answers;
          for (const auto& ans : answers) {
            const std::string text = field(ans, "text").get<std::string>();
            ex.gold_texts.push_back(text);
            // answer_start counts Unicode code points, not bytes.
            const auto start_cp = field(ans, "answer_start").get<std::size_t>();
            const std::size_t len_cp = decode_utf8(text).size();
            if (start_cp >= cps.size() || start_cp + len_cp > cps.size()) {
              ++local.unaligned_answers;
              continue;
            }
            const std::size_t b = cps[start_cp].begin;
            const std::size_t e = len_cp == 0 ? b : cps[start_cp + len_cp - 1].end;
            if (context.compare(b, e - b, text) != 0) {
              ++local.unaligned_answers;
              continue;
            }
            auto span = align_answer(b, e - b, context_tokens);
            if (!span) {
              ++local.unaligned_answers;
              continue;
            }
            if (std::find(ex.gold_spans.begin(), ex.gold_spans.end(), *span) == ex.gold_spans.end())
              ex.gold_spans.push_back(*span);
          }
          if ((require_answers && ex.gold_spans.empty()) || ex.question_tokens.empty() || context_tokens.empty()) {
            ++local.dropped;
            continue;
          }
          out.push_back(std::move(ex));
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("squad: unexpected structure: ") + e.what());
  }
  local.loaded = out.size();
  if (stats) *stats = local;
  return out;
}

std::vector<QAExample> load_squad(const std::filesystem::path& path, LoadStats* stats, bool require_answers) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("squad: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_squad(ss.str(), stats, require_answers);
}

}  // namespace rumi
