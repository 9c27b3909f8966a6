#include "hed/utf8.hpp"

#include "hed/errors.hpp"

namespace hed::utf8 {
namespace {

// Decodes one scalar value starting at byte i. Returns its byte width,
// or 0 when the sequence is malformed.
std::size_t decode_width(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return 1;
  std::size_t width = 0;
  unsigned cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    width = 2;
    cp = b0 & 0x1Fu;
  } else if ((b0 & 0xF0) == 0xE0) {
    width = 3;
    cp = b0 & 0x0Fu;
  } else if ((b0 & 0xF8) == 0xF0) {
    width = 4;
    cp = b0 & 0x07u;
  } else {
    return 0;
  }
  if (i + width > s.size()) return 0;
  for (std::size_t k = 1; k < width; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3Fu);
  }
  // Reject overlong encodings, surrogates, and out-of-range values.
  static constexpr unsigned kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[width]) return 0;
  if (cp >= 0xD800 && cp <= 0xDFFF) return 0;
  if (cp > 0x10FFFF) return 0;
  return width;
}

}  // namespace

bool valid(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t w = decode_width(s, i);
    if (w == 0) return false;
    i += w;
  }
  return true;
}

std::size_t length(std::string_view s) {
  std::size_t i = 0;
  std::size_t n = 0;
  while (i < s.size()) {
    const std::size_t w = decode_width(s, i);
    if (w == 0) throw SchemaError("invalid UTF-8 at byte " + std::to_string(i));
    i += w;
    ++n;
  }
  return n;
}

std::size_t byte_offset(std::string_view s, std::size_t char_index) {
  std::size_t i = 0;
  std::size_t n = 0;
  while (n < char_index) {
    if (i >= s.size()) {
      throw SchemaError("char offset " + std::to_string(char_index) +
                        " out of range (text has " + std::to_string(n) +
                        " chars)");
    }
    const std::size_t w = decode_width(s, i);
    if (w == 0) throw SchemaError("invalid UTF-8 at byte " + std::to_string(i));
    i += w;
    ++n;
  }
  return i;
}

std::string_view substr(std::string_view s, std::size_t start, std::size_t end) {
  if (start > end) throw SchemaError("span start > end");
  const std::size_t b0 = byte_offset(s, start);
  const std::size_t b1 = byte_offset(s, end);
  return s.substr(b0, b1 - b0);
}

}  // namespace hed::utf8
