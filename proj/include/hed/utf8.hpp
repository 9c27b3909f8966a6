#pragma once

#include <cstddef>
#include <string>
#include <string_view>

// Minimal UTF-8 helpers. Corpus spans are offsets over Unicode scalar
// values, not bytes, so every span check has to translate between the two.
namespace hed::utf8 {

// True iff s is well-formed UTF-8 (no overlongs, surrogates, or > U+10FFFF).
bool valid(std::string_view s);

// Number of Unicode scalar values in s. Throws SchemaError on invalid UTF-8.
std::size_t length(std::string_view s);

// Byte offset of the char_index-th scalar value (char_index may equal
// length(s), yielding s.size()). Throws SchemaError when out of range.
std::size_t byte_offset(std::string_view s, std::size_t char_index);

// Substring by scalar-value offsets [start, end).
std::string_view substr(std::string_view s, std::size_t start, std::size_t end);

}  // namespace hed::utf8
