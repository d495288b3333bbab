#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rumi {

/// A token with byte offsets [begin, end) into the source string.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Codepoint {
  char32_t value;
  std::size_t begin;  // byte offset
  std::size_t end;
};

/// Lenient UTF-8 decode: malformed bytes become U+FFFD one byte at a time.
std::vector<Codepoint> decode_utf8(std::string_view text);
std::string encode_utf8(char32_t cp);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);

/// Whitespace split, then leading and trailing punctuation peeled off into
/// one-character tokens. Offsets index the original bytes.
std::vector<Token> tokenize(std::string_view text);

std::string ascii_lower(std::string_view text);

}  // namespace rumi
