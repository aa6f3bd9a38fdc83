#pragma once

// Unicode plumbing: strict UTF-8 <-> UTF-32 codec, NFC/NFD normalization,
// combining-mark removal and the character classes the noising rules need.
// ICU does the heavy lifting; everything downstream works on std::u32string
// so character indices stay stable.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace textnoise::uni {

class EncodingError : public std::runtime_error {
 public:
  EncodingError(std::size_t offset, const std::string& what)
      : std::runtime_error(what + " at byte offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// ---- strict UTF-8 codec (overlongs, surrogates, out-of-range are errors) ----

inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1Fu;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0Fu;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07u;
    } else {
      throw EncodingError(i, "invalid UTF-8 lead byte");
    }
    if (i + len > s.size()) throw EncodingError(i, "truncated UTF-8 sequence");
    for (std::size_t k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) throw EncodingError(i + k, "invalid UTF-8 continuation byte");
      cp = (cp << 6) | (b & 0x3Fu);
    }
    static constexpr char32_t kMinForLen[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLen[len]) throw EncodingError(i, "overlong UTF-8 sequence");
    if (cp >= 0xD800 && cp <= 0xDFFF) throw EncodingError(i, "UTF-8 encodes a surrogate");
    if (cp > 0x10FFFF) throw EncodingError(i, "code point out of range");
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) append_utf8(out, cp);
  return out;
}

inline bool is_valid_utf8(std::string_view s) noexcept {
  try {
    decode_utf8(s);
    return true;
  } catch (const EncodingError&) {
    return false;
  }
}

// ---- character classes (thin ICU wrappers) ----

inline bool is_combining_mark(char32_t c) {
  return u_charType(static_cast<UChar32>(c)) == U_NON_SPACING_MARK;
}

// General categories P*.
inline bool is_punct(char32_t c) { return u_ispunct(static_cast<UChar32>(c)) != 0; }

// General categories L*.
inline bool is_letter(char32_t c) { return u_isalpha(static_cast<UChar32>(c)) != 0; }

inline bool is_whitespace(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0; }

inline bool is_upper(char32_t c) {
  return u_isupper(static_cast<UChar32>(c)) != 0 || u_istitle(static_cast<UChar32>(c)) != 0;
}

inline bool is_lower(char32_t c) { return u_islower(static_cast<UChar32>(c)) != 0; }

inline bool is_cased(char32_t c) { return is_upper(c) || is_lower(c); }

inline char32_t to_lower(char32_t c) {
  return static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
}

inline char32_t to_upper(char32_t c) {
  return static_cast<char32_t>(u_toupper(static_cast<UChar32>(c)));
}

// Upper -> lower, lower -> upper, everything else unchanged (simple mappings,
// so string length in characters never changes).
inline char32_t flip_case(char32_t c) {
  if (is_upper(c)) return to_lower(c);
  if (is_lower(c)) return to_upper(c);
  return c;
}

inline char32_t fold_char(char32_t c) {
  return static_cast<char32_t>(u_foldCase(static_cast<UChar32>(c), U_FOLD_CASE_DEFAULT));
}

// ---- normalization ----

namespace detail {

inline const icu::Normalizer2& nfc_instance() {
  UErrorCode ec = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(ec);
  if (U_FAILURE(ec) || n == nullptr) throw std::runtime_error("ICU NFC instance unavailable");
  return *n;
}

inline const icu::Normalizer2& nfd_instance() {
  UErrorCode ec = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFDInstance(ec);
  if (U_FAILURE(ec) || n == nullptr) throw std::runtime_error("ICU NFD instance unavailable");
  return *n;
}

inline icu::UnicodeString to_icu(std::u32string_view s) {
  icu::UnicodeString u;
  for (char32_t cp : s) u.append(static_cast<UChar32>(cp));
  return u;
}

inline std::u32string from_icu(const icu::UnicodeString& u) {
  std::u32string out;
  out.reserve(static_cast<std::size_t>(u.length()));
  for (int32_t i = 0; i < u.length();) {
    const UChar32 cp = u.char32At(i);
    out.push_back(static_cast<char32_t>(cp));
    i += U16_LENGTH(cp);
  }
  return out;
}

inline std::u32string normalize(std::u32string_view s, const icu::Normalizer2& n) {
  bool ascii = true;
  for (char32_t cp : s) {
    if (cp >= 0x80) {
      ascii = false;
      break;
    }
  }
  if (ascii) return std::u32string(s);
  UErrorCode ec = U_ZERO_ERROR;
  const icu::UnicodeString u = to_icu(s);
  const icu::UnicodeString r = n.normalize(u, ec);
  if (U_FAILURE(ec)) throw std::runtime_error("ICU normalization failed");
  return from_icu(r);
}

}  // namespace detail

inline std::u32string nfc(std::u32string_view s) {
  return detail::normalize(s, detail::nfc_instance());
}

inline std::u32string nfd(std::u32string_view s) {
  return detail::normalize(s, detail::nfd_instance());
}

inline std::string nfc_utf8(std::string_view s) { return encode_utf8(nfc(decode_utf8(s))); }

// Canonical decomposition of one composed character with its nonspacing marks
// dropped, recomposed. A character that is itself a bare mark (nothing left
// after filtering) is returned unchanged so string length is preserved.
inline std::u32string strip_marks_char(char32_t c) {
  thread_local std::unordered_map<char32_t, std::u32string> cache;
  if (auto it = cache.find(c); it != cache.end()) return it->second;

  std::u32string result(1, c);
  icu::UnicodeString decomp;
  if (detail::nfd_instance().getDecomposition(static_cast<UChar32>(c), decomp)) {
    std::u32string kept;
    for (char32_t cp : detail::from_icu(decomp)) {
      if (!is_combining_mark(cp)) kept.push_back(cp);
    }
    if (!kept.empty()) result = nfc(kept);
  }
  cache.emplace(c, result);
  return result;
}

// True when the character carries at least one nonspacing mark.
inline bool has_marks(char32_t c) {
  const std::u32string base = strip_marks_char(c);
  return base.size() != 1 || base[0] != c;
}

// ---- small token helpers ----

inline bool is_punct_token(std::u32string_view tok) {
  if (tok.empty()) return false;
  for (char32_t c : tok) {
    if (!is_punct(c)) return false;
  }
  return true;
}

inline bool has_letter(std::u32string_view tok) {
  for (char32_t c : tok) {
    if (is_letter(c)) return true;
  }
  return false;
}

inline bool has_whitespace(std::u32string_view tok) {
  for (char32_t c : tok) {
    if (is_whitespace(c)) return true;
  }
  return false;
}

}  // namespace textnoise::uni
