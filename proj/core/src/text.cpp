#include "rumi/text.hpp"

namespace rumi {

std::vector<Codepoint> decode_utf8(std::string_view text) {
  std::vector<Codepoint> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xf0 && b0 < 0xf8) {
      len = 4;
      cp = b0 & 0x07;
    } else if (b0 >= 0xe0) {
      len = b0 < 0xf0 ? 3 : 1;
      cp = b0 & 0x0f;
    } else if (b0 >= 0xc0) {
      len = 2;
      cp = b0 & 0x1f;
    } else if (b0 >= 0x80) {
      len = 0;
    }
    bool ok = len > 0 && i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xc0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3f);
    }
    if (!ok || (b0 >= 0xf8)) {
      out.push_back({char32_t{0xfffd}, i, i + 1});
      ++i;
      continue;
    }
    out.push_back({cp, i, i + len});
    i += len;
  }
  return out;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
  return out;
}

bool is_space(char32_t cp) {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x00a0: case 0x1680: case 0x202f: case 0x205f: case 0x3000: case 0xfeff:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200b;
  }
}

bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2f) || (cp >= 0x3a && cp <= 0x40) ||
           (cp >= 0x5b && cp <= 0x60) || (cp >= 0x7b && cp <= 0x7e);
  }
  switch (cp) {
    case 0x00a1: case 0x00ab: case 0x00b7: case 0x00bb: case 0x00bf:
      return true;
    default:
      // General punctuation block: dashes, quotes, ellipsis.
      return cp >= 0x2010 && cp <= 0x2027;
  }
}

std::vector<Token> tokenize(std::string_view text) {
  const auto cps = decode_utf8(text);
  std::vector<Token> tokens;
  auto emit = [&](std::size_t from, std::size_t to) {  // codepoint indices, to exclusive
    const std::size_t b = cps[from].begin;
    const std::size_t e = cps[to - 1].end;
    tokens.push_back({std::string(text.substr(b, e - b)), b, e});
  };

  std::size_t i = 0;
  while (i < cps.size()) {
    if (is_space(cps[i].value)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && !is_space(cps[j].value)) ++j;
    std::size_t lo = i;
    std::size_t hi = j;
    while (lo < hi && is_punct(cps[lo].value)) {
      emit(lo, lo + 1);
      ++lo;
    }
    std::size_t trail = hi;
    while (trail > lo && is_punct(cps[trail - 1].value)) --trail;
    if (lo < trail) emit(lo, trail);
    for (std::size_t k = trail; k < hi; ++k) emit(k, k + 1);
    i = j;
  }
  return tokens;
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

}  // namespace rumi
