#include "coheval/unicode.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace coheval::text {
namespace {

icu::UnicodeString to_icu(std::string_view utf8) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
}

std::string from_icu(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

// Calls fn(code_point, byte_offset, byte_length) for every code point.
template <typename Fn>
void for_each_code_point(std::string_view utf8, Fn&& fn) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 cp = 0;
    U8_NEXT(bytes, i, length, cp);
    if (cp < 0) cp = 0xFFFD;
    fn(static_cast<char32_t>(cp), static_cast<std::size_t>(start), static_cast<std::size_t>(i - start));
  }
}

}  // namespace

bool is_whitespace(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0; }

bool is_punctuation_or_symbol(char32_t cp) {
  const auto mask = U_GET_GC_MASK(static_cast<UChar32>(cp));
  return (mask & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

std::string nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  icu::UnicodeString normalized = normalizer->normalize(to_icu(utf8), status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalization failed");
  return from_icu(normalized);
}

std::string to_lower(std::string_view utf8) {
  icu::UnicodeString s = to_icu(utf8);
  s.toLower(icu::Locale::getRoot());
  return from_icu(s);
}

std::string collapse_whitespace(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  bool pending_space = false;
  for_each_code_point(utf8, [&](char32_t cp, std::size_t off, std::size_t len) {
    if (is_whitespace(cp)) {
      pending_space = !out.empty();
      return;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(utf8.substr(off, len));
  });
  return out;
}

std::string trim(std::string_view utf8) {
  std::size_t begin = std::string_view::npos;
  std::size_t end = 0;
  for_each_code_point(utf8, [&](char32_t cp, std::size_t off, std::size_t len) {
    if (is_whitespace(cp)) return;
    if (begin == std::string_view::npos) begin = off;
    end = off + len;
  });
  if (begin == std::string_view::npos) return {};
  return std::string(utf8.substr(begin, end - begin));
}

std::vector<std::string> split_whitespace(std::string_view utf8) {
  std::vector<std::string> out;
  std::string current;
  for_each_code_point(utf8, [&](char32_t cp, std::size_t off, std::size_t len) {
    if (is_whitespace(cp)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      return;
    }
    current.append(utf8.substr(off, len));
  });
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string strip_punctuation(std::string_view utf8) {
  std::size_t begin = std::string_view::npos;
  std::size_t end = 0;
  for_each_code_point(utf8, [&](char32_t cp, std::size_t off, std::size_t len) {
    if (is_punctuation_or_symbol(cp)) return;
    if (begin == std::string_view::npos) begin = off;
    end = off + len;
  });
  if (begin == std::string_view::npos) return {};
  return std::string(utf8.substr(begin, end - begin));
}

std::vector<std::string> content_characters(std::string_view utf8) {
  std::vector<std::string> out;
  for_each_code_point(utf8, [&](char32_t cp, std::size_t off, std::size_t len) {
    if (is_whitespace(cp) || is_punctuation_or_symbol(cp)) return;
    out.emplace_back(utf8.substr(off, len));
  });
  return out;
}

}  // namespace coheval::text
