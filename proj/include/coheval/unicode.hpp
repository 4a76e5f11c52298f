#pragma once

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers backed by ICU. Invalid byte sequences are replaced with
// U+FFFD rather than rejected.
namespace coheval::text {

std::string nfc(std::string_view utf8);
std::string to_lower(std::string_view utf8);

// Trim, then collapse every run of Unicode whitespace to one ASCII space.
std::string collapse_whitespace(std::string_view utf8);
std::string trim(std::string_view utf8);

std::vector<std::string> split_whitespace(std::string_view utf8);

// Strip leading and trailing code points in general categories P* and S*.
std::string strip_punctuation(std::string_view utf8);

// One string per code point that is neither whitespace nor in P* / S*.
std::vector<std::string> content_characters(std::string_view utf8);

bool is_whitespace(char32_t cp);
bool is_punctuation_or_symbol(char32_t cp);

}  // namespace coheval::text
