#pragma once

// Small UTF-8 helpers shared by the parser and the similarity scorer.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace inkeval::text {

/// Decodes UTF-8 into code points; invalid bytes become U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);

bool is_space(char32_t cp);
/// Han ideographs plus kana and hangul: each code point is its own token.
bool is_cjk(char32_t cp);

std::string trim(std::string_view s);
/// Collapses whitespace runs (ASCII and ideographic) to one space and trims.
std::string normalize_whitespace(std::string_view s);

std::string ascii_lower(std::string_view s);

/// Case-insensitive (ASCII only) prefix match of `needle` at `pos` in `hay`.
bool matches_at(std::string_view hay, std::size_t pos, std::string_view needle, bool ascii_ci);

}  // namespace inkeval::text
