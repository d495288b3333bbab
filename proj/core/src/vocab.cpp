#include "rumi/vocab.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rumi/text.hpp"

namespace rumi {

Vocab::Vocab() { add("<unk>"); }

std::size_t Vocab::add(std::string_view token) {
  std::string key = ascii_lower(token);
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  const std::size_t id = tokens_.size();
  tokens_.push_back(key);
  ids_.emplace(std::move(key), id);
  return id;
}

std::size_t Vocab::id_of(std::string_view token) const {
  auto it = ids_.find(ascii_lower(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const { return ids_.contains(ascii_lower(token)); }

Vocab Vocab::build(const std::vector<QAExample>& examples) {
  Vocab v;
  for (const auto& ex : examples) {
    for (const auto& t : ex.context_tokens) v.add(t.text);
    for (const auto& t : ex.question_tokens) v.add(t.text);
  }
  return v;
}

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens) {
  Vocab v;
  for (std::size_t i = 1; i < tokens.size(); ++i) v.add(tokens[i]);
  if (v.size() != tokens.size() && !tokens.empty())
    throw DataError("vocab: token list is not a valid vocabulary");
  return v;
}

Charset::Charset() {
  chars_ = {0xfffd, 0};  // placeholders for UNK and PAD; never looked up
}

std::size_t Charset::add(char32_t cp) {
  if (auto it = ids_.find(cp); it != ids_.end()) return it->second;
  const std::size_t id = chars_.size();
  chars_.push_back(cp);
  ids_.emplace(cp, id);
  return id;
}

std::size_t Charset::id_of(char32_t cp) const {
  auto it = ids_.find(cp);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Charset::encode(std::string_view word, std::size_t max_len) const {
  std::vector<std::size_t> ids;
  for (const auto& cp : decode_utf8(word)) {
    if (ids.size() == max_len) break;
    ids.push_back(id_of(cp.value));
  }
  return ids;
}

Charset Charset::build(const std::vector<QAExample>& examples) {
  Charset c;
  for (const auto& ex : examples) {
    for (const auto& cp : decode_utf8(ex.context)) if (!is_space(cp.value)) c.add(cp.value);
    for (const auto& cp : decode_utf8(ex.question)) if (!is_space(cp.value)) c.add(cp.value);
  }
  return c;
}

Charset Charset::from_codepoints(const std::vector<char32_t>& cps) {
  Charset c;
  for (std::size_t i = 2; i < cps.size(); ++i) c.add(cps[i]);
  return c;
}

EmbeddingTable load_glove(const std::filesystem::path& path, const Vocab& vocab, std::size_t dim,
                          GloveStats* stats) {
  std::ifstream in(path);
  if (!in) throw DataError("glove: cannot open " + path.string());
  EmbeddingTable table;
  table.matrix = ad::Tensor::matrix(vocab.size(), dim);
  table.found.assign(vocab.size(), 0);
  GloveStats local;
  std::string line;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++local.lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0) {
      ++local.malformed;
      continue;
    }
    const std::string_view token(line.data(), space);
    values.clear();
    const char* p = line.data() + space;
    const char* end = line.data() + line.size();
    bool ok = true;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (next != end && *next != ' ')) {
        ok = false;
        break;
      }
      values.push_back(v);
      p = next;
    }
    if (!ok || values.size() != dim) {
      ++local.malformed;
      continue;
    }
    if (!vocab.contains(token)) continue;
    const std::size_t id = vocab.id_of(token);
    if (id == Vocab::kUnk || table.found[id]) continue;
    for (std::size_t k = 0; k < dim; ++k) table.matrix.at(id, k) = values[k];
    table.found[id] = 1;
    ++local.loaded;
  }
  if (stats) *stats = local;
  return table;
}

void save_glove(const std::filesystem::path& path, const Vocab& vocab, const EmbeddingTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("glove: cannot write " + path.string());
  char buf[64];
  for (std::size_t id = 1; id < vocab.size(); ++id) {
    if (!table.found.empty() && !table.found[id]) continue;
    out << vocab.token(id);
    for (std::size_t k = 0; k < table.matrix.cols(); ++k) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), table.matrix.at(id, k));
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    out << '\n';
  }
}

}  // namespace rumi
