#pragma once

// Error aspects: the eight perturbation families, their statistics blocks,
// diacritics stripping, character-level edit distance, and the classifier
// that maps an error-introducing edit onto exactly one aspect.
//
// Canonical aspect order (cumulative level k enables kinds 1..k):
//   1 diacritics   2 casing   3 spelling   4 affix
//   5 punctuation  6 whitespace  7 word_order  8 common_other
// Kinds 1-4 never change tokenization.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "textnoise/m2.hpp"
#include "textnoise/unicode.hpp"

namespace textnoise {

enum class AspectKind {
  diacritics = 1,
  casing = 2,
  spelling = 3,
  affix = 4,
  punctuation = 5,
  whitespace = 6,
  word_order = 7,
  common_other = 8,
};

inline constexpr std::array<AspectKind, 8> kAspectOrder = {
    AspectKind::diacritics, AspectKind::casing,     AspectKind::spelling,
    AspectKind::affix,      AspectKind::punctuation, AspectKind::whitespace,
    AspectKind::word_order, AspectKind::common_other,
};

inline bool preserves_tokenization(AspectKind k) {
  return static_cast<int>(k) <= static_cast<int>(AspectKind::affix);
}

inline std::string_view aspect_name(AspectKind k) {
  switch (k) {
    case AspectKind::diacritics: return "diacritics";
    case AspectKind::casing: return "casing";
    case AspectKind::spelling: return "spelling";
    case AspectKind::affix: return "affix";
    case AspectKind::punctuation: return "punctuation";
    case AspectKind::whitespace: return "whitespace";
    case AspectKind::word_order: return "word_order";
    case AspectKind::common_other: return "common_other";
  }
  return "unknown";
}

inline std::optional<AspectKind> aspect_from_name(std::string_view name) {
  for (AspectKind k : kAspectOrder) {
    if (aspect_name(k) == name) return k;
  }
  return std::nullopt;
}

// Kinds 1..level in canonical order.
inline std::vector<AspectKind> cumulative_aspects(int level) {
  std::vector<AspectKind> out;
  for (AspectKind k : kAspectOrder) {
    if (static_cast<int>(k) <= level) out.push_back(k);
  }
  return out;
}

class AspectUnavailableError : public std::runtime_error {
 public:
  explicit AspectUnavailableError(AspectKind k)
      : std::runtime_error("aspect unavailable: " + std::string(aspect_name(k))) {}
};

// ---- aspect statistics -------------------------------------------------
//
// Trigger probabilities are per estimation unit (per sentence, word, cased
// character, diacritic-bearing character, punctuation token, or token gap).
// Distribution maps hold probabilities that sum to 1 (tables over pairs sum
// to 1 jointly); keys are UTF-8 strings so they serialize losslessly.

using Lexicon = std::map<std::string, std::uint64_t>;
using ProbMap = std::map<std::string, double>;
using PairTable = std::map<std::string, ProbMap>;

struct DiacriticsStats {
  double p_sentence = 0.0;  // per sentence: strip every mark in the sentence
  double p_char = 0.0;      // per diacritic-bearing character otherwise
  bool saturated = false;
  friend bool operator==(const DiacriticsStats&, const DiacriticsStats&) = default;
};

struct CasingStats {
  double p_first = 0.0;  // per word with a cased first character
  double p_other = 0.0;  // per cased non-first character
  bool saturated = false;
  friend bool operator==(const CasingStats&, const CasingStats&) = default;
};

inline constexpr std::string_view kOpInsert = "insert";
inline constexpr std::string_view kOpRemove = "remove";
inline constexpr std::string_view kOpReplace = "replace";
inline constexpr std::string_view kOpSwap = "swap";
inline constexpr std::string_view kOpConfusion = "word_confusion";

struct SpellingStats {
  double p_word = 0.0;  // per word containing a letter
  ProbMap ops;          // insert / remove / replace / swap / word_confusion
  ProbMap insert_chars; // inserted character -> probability
  PairTable replace_pairs;  // original char -> replacement char (joint)
  bool saturated = false;
  friend bool operator==(const SpellingStats&, const SpellingStats&) = default;
};

struct AffixStats {
  double p_word = 0.0;    // per word containing a letter
  double p_suffix = 1.0;  // suffix branch probability (else prefix)
  PairTable suffix_table;  // clean suffix -> noisy suffix (joint)
  PairTable prefix_table;  // clean prefix -> noisy prefix (joint)
  bool saturated = false;
  friend bool operator==(const AffixStats&, const AffixStats&) = default;
};

struct PunctuationStats {
  double p_insert = 0.0;   // per token gap
  double p_remove = 0.0;   // per punctuation token
  double p_replace = 0.0;  // per punctuation token
  ProbMap insert_tokens;
  PairTable replace_pairs;  // joint
  bool saturated = false;
  friend bool operator==(const PunctuationStats&, const PunctuationStats&) = default;
};

struct WhitespaceStats {
  double p_join = 0.0;   // per internal token gap: drop the space
  double p_split = 0.0;  // per token of >= 2 characters: insert a space
  bool saturated = false;
  friend bool operator==(const WhitespaceStats&, const WhitespaceStats&) = default;
};

struct WordOrderStats {
  double p_sentence = 0.0;  // per sentence: permute one window
  ProbMap window_sizes;     // "2" | "3" | "4" -> probability
  bool saturated = false;
  friend bool operator==(const WordOrderStats&, const WordOrderStats&) = default;
};

struct CommonOtherStats {
  double p_word = 0.0;  // per word: replace/delete a phrase starting here
  double p_gap = 0.0;   // per token gap: insert a phrase
  PairTable phrase_table;  // clean phrase -> noisy phrase ("" deletes; joint)
  ProbMap insert_phrases;
  bool saturated = false;
  friend bool operator==(const CommonOtherStats&, const CommonOtherStats&) = default;
};

// The full statistics block of a profile: one optional entry per aspect
// (absent aspect = disabled) plus the lexicon and alphabet the tables
// reference.
struct AspectStatsSet {
  std::optional<DiacriticsStats> diacritics;
  std::optional<CasingStats> casing;
  std::optional<SpellingStats> spelling;
  std::optional<AffixStats> affix;
  std::optional<PunctuationStats> punctuation;
  std::optional<WhitespaceStats> whitespace;
  std::optional<WordOrderStats> word_order;
  std::optional<CommonOtherStats> common_other;
  Lexicon lexicon;
  std::u32string alphabet;  // sorted unique characters observed in the corpus

  bool has(AspectKind k) const {
    switch (k) {
      case AspectKind::diacritics: return diacritics.has_value();
      case AspectKind::casing: return casing.has_value();
      case AspectKind::spelling: return spelling.has_value();
      case AspectKind::affix: return affix.has_value();
      case AspectKind::punctuation: return punctuation.has_value();
      case AspectKind::whitespace: return whitespace.has_value();
      case AspectKind::word_order: return word_order.has_value();
      case AspectKind::common_other: return common_other.has_value();
    }
    return false;
  }

  std::vector<AspectKind> enabled() const {
    std::vector<AspectKind> out;
    for (AspectKind k : kAspectOrder) {
      if (has(k)) out.push_back(k);
    }
    return out;
  }

  friend bool operator==(const AspectStatsSet&, const AspectStatsSet&) = default;
};

// ---- diacritics stripping ----------------------------------------------

// One pass: strip marks from the characters selected by `mask` (all of them
// when mask is null). Operates on NFC text; mask indexes NFC characters, and
// each selected character maps to its mark-free form so masked stripping
// preserves character count.
inline std::u32string strip_diacritics_pass(std::u32string_view nfc_text,
                                            const std::vector<bool>* mask = nullptr) {
  std::u32string out;
  out.reserve(nfc_text.size());
  for (std::size_t i = 0; i < nfc_text.size(); ++i) {
    const char32_t c = nfc_text[i];
    if (mask != nullptr && (i >= mask->size() || !(*mask)[i])) {
      out.push_back(c);
      continue;
    }
    out += uni::strip_marks_char(c);
  }
  return out;
}

// Full strip, iterated to a fixed point so that stray combining marks that
// re-compose under NFC cannot survive a single pass (makes the operation
// idempotent on arbitrary input).
inline std::u32string strip_diacritics_u32(std::u32string_view text) {
  std::u32string s = uni::nfc(text);
  while (true) {
    std::u32string t = uni::nfc(strip_diacritics_pass(s));
    if (t == s) return s;
    s = std::move(t);
  }
}

inline std::string strip_diacritics(std::string_view utf8,
                                    const std::vector<bool>* mask = nullptr) {
  const std::u32string nfc_text = uni::nfc(uni::decode_utf8(utf8));
  if (mask != nullptr) return uni::encode_utf8(strip_diacritics_pass(nfc_text, mask));
  return uni::encode_utf8(strip_diacritics_u32(nfc_text));
}

// ---- character-level edit distance (optimal string alignment) ----------
//
// Unit costs for insert / remove / replace plus adjacent transposition.

inline std::size_t osa_distance(std::u32string_view a, std::u32string_view b,
                                std::size_t cap = static_cast<std::size_t>(-1)) {
  const std::size_t n = a.size(), m = b.size();
  const std::size_t diff = n > m ? n - m : m - n;
  if (cap != static_cast<std::size_t>(-1) && diff > cap) return cap + 1;
  std::vector<std::size_t> prev2(m + 1), prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    std::size_t row_min = cur[0];
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t best = std::min(prev[j] + 1, cur[j - 1] + 1);
      best = std::min(best, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1));
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        best = std::min(best, prev2[j - 2] + 1);
      }
      cur[j] = best;
      row_min = std::min(row_min, best);
    }
    if (cap != static_cast<std::size_t>(-1) && row_min > cap) return cap + 1;
    std::swap(prev2, prev);
    std::swap(prev, cur);
  }
  return prev[m];
}

enum class CharOpKind { insert_char, remove_char, replace_char, swap_chars, word_confusion };

inline std::string_view char_op_name(CharOpKind k) {
  switch (k) {
    case CharOpKind::insert_char: return kOpInsert;
    case CharOpKind::remove_char: return kOpRemove;
    case CharOpKind::replace_char: return kOpReplace;
    case CharOpKind::swap_chars: return kOpSwap;
    case CharOpKind::word_confusion: return kOpConfusion;
  }
  return "unknown";
}

struct CharOp {
  CharOpKind kind{};
  std::size_t pos = 0;   // position in the string being transformed
  char32_t from = 0;
  char32_t to = 0;
  std::string target;    // word_confusion only: the chosen lexicon word
};

// Minimal op sequence turning `a` into `b` (backtraced from the distance
// table; swap preferred over replace over remove over insert on ties). Ops
// are ordered right-to-left, so applying them in sequence keeps positions
// valid.
inline std::vector<CharOp> decompose_char_ops(std::u32string_view a, std::u32string_view b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t best = std::min(d[i - 1][j] + 1, d[i][j - 1] + 1);
      best = std::min(best, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1));
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        best = std::min(best, d[i - 2][j - 2] + 1);
      }
      d[i][j] = best;
    }
  }
  std::vector<CharOp> ops;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] &&
        d[i][j] == d[i - 2][j - 2] + 1) {
      ops.push_back({CharOpKind::swap_chars, i - 2, a[i - 2], a[i - 1], {}});
      i -= 2;
      j -= 2;
      continue;
    }
    if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)) {
      if (a[i - 1] != b[j - 1]) {
        ops.push_back({CharOpKind::replace_char, i - 1, a[i - 1], b[j - 1], {}});
      }
      --i;
      --j;
      continue;
    }
    if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ops.push_back({CharOpKind::remove_char, i - 1, a[i - 1], 0, {}});
      --i;
      continue;
    }
    ops.push_back({CharOpKind::insert_char, i, 0, b[j - 1], {}});
    --j;
  }
  return ops;
}

// Test/debug helper: replay a decomposition.
inline std::u32string apply_char_ops(std::u32string_view a, const std::vector<CharOp>& ops) {
  std::u32string s(a);
  for (const CharOp& op : ops) {
    switch (op.kind) {
      case CharOpKind::insert_char: s.insert(s.begin() + op.pos, op.to); break;
      case CharOpKind::remove_char: s.erase(s.begin() + op.pos); break;
      case CharOpKind::replace_char: s[op.pos] = op.to; break;
      case CharOpKind::swap_chars: std::swap(s[op.pos], s[op.pos + 1]); break;
      case CharOpKind::word_confusion: break;
    }
  }
  return s;
}

// ---- classification -----------------------------------------------------

struct DiacriticsDetail {
  int stripped = 0;  // characters that lost marks (clean -> noisy direction)
  int added = 0;     // characters that gained marks
};
struct CasingDetail {
  int first_flips = 0;
  int other_flips = 0;
};
struct SpellingDetail {
  std::vector<CharOp> ops;  // one word_confusion op, or 1-2 character ops
};
struct AffixDetail {
  bool is_suffix = true;
  std::string clean_affix;
  std::string noisy_affix;
};
struct PunctuationDetail {
  std::vector<std::string> inserted;
  std::vector<std::string> removed;
  std::vector<std::pair<std::string, std::string>> replaced;
};
struct WhitespaceDetail {
  int joins = 0;
  int splits = 0;
};
struct WordOrderDetail {
  int window = 0;
};
struct CommonOtherDetail {
  std::string clean_phrase;
  std::string noisy_phrase;
  bool mined = false;  // both sides short enough for the phrase table
};

using AspectDetail =
    std::variant<DiacriticsDetail, CasingDetail, SpellingDetail, AffixDetail, PunctuationDetail,
                 WhitespaceDetail, WordOrderDetail, CommonOtherDetail>;

struct ClassifiedEdit {
  Edit edit;
  AspectKind kind{};
  AspectDetail detail;
};

namespace detail {

inline std::u32string join_tokens_u32(const std::vector<std::u32string>& toks) {
  std::u32string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i > 0) out.push_back(U' ');
    out += toks[i];
  }
  return out;
}

inline std::u32string concat_tokens_u32(const std::vector<std::u32string>& toks) {
  std::u32string out;
  for (const auto& t : toks) out += t;
  return out;
}

inline std::vector<std::u32string> decode_nfc_tokens(const std::vector<std::string>& toks) {
  std::vector<std::u32string> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(uni::nfc(uni::decode_utf8(t)));
  return out;
}

inline bool fold_equal(std::u32string_view a, std::u32string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (uni::fold_char(a[i]) != uni::fold_char(b[i])) return false;
  }
  return true;
}

inline std::size_t common_prefix_len(std::u32string_view a, std::u32string_view b) {
  std::size_t i = 0;
  while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
  return i;
}

inline std::size_t common_suffix_len(std::u32string_view a, std::u32string_view b) {
  std::size_t i = 0;
  while (i < a.size() && i < b.size() && a[a.size() - 1 - i] == b[b.size() - 1 - i]) ++i;
  return i;
}

}  // namespace detail

// Suffix rule: common stem (prefix) of >= 2 characters covering at least half
// of the shorter word, with the differing suffixes capped at 4 characters.
// The mirrored prefix rule applies only when the suffix rule fails.
inline std::optional<AffixDetail> match_affix(std::u32string_view clean, std::u32string_view noisy) {
  const std::size_t shorter = std::min(clean.size(), noisy.size());
  const std::size_t lcp = detail::common_prefix_len(clean, noisy);
  if (lcp >= 2 && 2 * lcp >= shorter && clean.size() - lcp <= 4 && noisy.size() - lcp <= 4) {
    AffixDetail d;
    d.is_suffix = true;
    d.clean_affix = uni::encode_utf8(clean.substr(lcp));
    d.noisy_affix = uni::encode_utf8(noisy.substr(lcp));
    return d;
  }
  const std::size_t lcs = detail::common_suffix_len(clean, noisy);
  if (lcs >= 2 && 2 * lcs >= shorter && clean.size() - lcs <= 4 && noisy.size() - lcs <= 4) {
    AffixDetail d;
    d.is_suffix = false;
    d.clean_affix = uni::encode_utf8(clean.substr(0, clean.size() - lcs));
    d.noisy_affix = uni::encode_utf8(noisy.substr(0, noisy.size() - lcs));
    return d;
  }
  return std::nullopt;
}

// Deterministic, total classification of one error-introducing edit (clean ->
// noisy direction) against the fixed precedence ladder.
inline ClassifiedEdit classify_edit(const std::vector<std::string>& clean_tokens,
                                    const Edit& edit, const Lexicon& lexicon) {
  ClassifiedEdit out;
  out.edit = edit;

  std::vector<std::string> clean_span_utf8(
      clean_tokens.begin() + edit.start, clean_tokens.begin() + edit.end);
  const auto clean_span = detail::decode_nfc_tokens(clean_span_utf8);
  const auto noisy_span = detail::decode_nfc_tokens(edit.replacement);
  const std::u32string clean_form = detail::join_tokens_u32(clean_span);
  const std::u32string noisy_form = detail::join_tokens_u32(noisy_span);

  auto fallback = [&] {
    CommonOtherDetail d;
    d.clean_phrase = uni::encode_utf8(clean_form);
    d.noisy_phrase = uni::encode_utf8(noisy_form);
    d.mined = clean_span.size() <= 3 && noisy_span.size() <= 3;
    out.kind = AspectKind::common_other;
    out.detail = std::move(d);
  };

  if (clean_form == noisy_form) {  // degenerate identity edit
    fallback();
    return out;
  }

  // 1. Diacritics: equal once both sides are mark-stripped.
  if (strip_diacritics_u32(clean_form) == strip_diacritics_u32(noisy_form)) {
    DiacriticsDetail d;
    if (clean_form.size() == noisy_form.size()) {
      for (std::size_t i = 0; i < clean_form.size(); ++i) {
        if (clean_form[i] == noisy_form[i]) continue;
        if (strip_diacritics_u32(std::u32string(1, clean_form[i])) ==
            std::u32string(1, noisy_form[i])) {
          ++d.stripped;
        } else {
          ++d.added;
        }
      }
    }
    out.kind = AspectKind::diacritics;
    out.detail = d;
    return out;
  }

  // 2. Casing: equal under per-character case folding.
  if (detail::fold_equal(clean_form, noisy_form)) {
    CasingDetail d;
    bool word_start = true;
    for (std::size_t i = 0; i < clean_form.size(); ++i) {
      if (clean_form[i] == U' ') {
        word_start = true;
        continue;
      }
      if (clean_form[i] != noisy_form[i]) {
        if (word_start) {
          ++d.first_flips;
        } else {
          ++d.other_flips;
        }
      }
      word_start = false;
    }
    out.kind = AspectKind::casing;
    out.detail = d;
    return out;
  }

  // 3. Whitespace: joining/splitting tokens with no other character change.
  if (detail::concat_tokens_u32(clean_span) == detail::concat_tokens_u32(noisy_span)) {
    WhitespaceDetail d;
    const int delta = static_cast<int>(clean_span.size()) - static_cast<int>(noisy_span.size());
    d.joins = delta > 0 ? delta : 0;
    d.splits = delta < 0 ? -delta : 0;
    out.kind = AspectKind::whitespace;
    out.detail = d;
    return out;
  }

  // 4. Punctuation: every token on both sides is punctuation-only.
  {
    bool all_punct = true;
    for (const auto& t : clean_span) all_punct = all_punct && uni::is_punct_token(t);
    for (const auto& t : noisy_span) all_punct = all_punct && uni::is_punct_token(t);
    if (all_punct && (!clean_span.empty() || !noisy_span.empty())) {
      PunctuationDetail d;
      const std::size_t paired = std::min(clean_span.size(), noisy_span.size());
      for (std::size_t i = 0; i < paired; ++i) {
        if (clean_span[i] != noisy_span[i]) {
          d.replaced.emplace_back(uni::encode_utf8(clean_span[i]),
                                  uni::encode_utf8(noisy_span[i]));
        }
      }
      for (std::size_t i = paired; i < clean_span.size(); ++i) {
        d.removed.push_back(uni::encode_utf8(clean_span[i]));
      }
      for (std::size_t i = paired; i < noisy_span.size(); ++i) {
        d.inserted.push_back(uni::encode_utf8(noisy_span[i]));
      }
      out.kind = AspectKind::punctuation;
      out.detail = std::move(d);
      return out;
    }
  }

  const bool single_pair = clean_span.size() == 1 && noisy_span.size() == 1;

  // 5. Affix: single-token pair sharing a long-enough stem.
  if (single_pair) {
    if (auto affix = match_affix(clean_span[0], noisy_span[0])) {
      out.kind = AspectKind::affix;
      out.detail = std::move(*affix);
      return out;
    }
  }

  // 6./7. Spelling: single-token pair within distance 2 - either a confusion
  // with an existing lexicon word or a character-op typo.
  if (single_pair && osa_distance(clean_span[0], noisy_span[0], 2) <= 2) {
    SpellingDetail d;
    const std::string noisy_utf8 = uni::encode_utf8(noisy_span[0]);
    if (lexicon.count(noisy_utf8) > 0) {
      CharOp op;
      op.kind = CharOpKind::word_confusion;
      op.target = noisy_utf8;
      d.ops.push_back(std::move(op));
    } else {
      d.ops = decompose_char_ops(clean_span[0], noisy_span[0]);
    }
    out.kind = AspectKind::spelling;
    out.detail = std::move(d);
    return out;
  }

  // 8. Word order: a 2-4 token window permuted (same token multiset).
  if (clean_span.size() >= 2 && clean_span.size() <= 4 &&
      clean_span.size() == noisy_span.size()) {
    std::vector<std::u32string> a = clean_span, b = noisy_span;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a == b) {
      out.kind = AspectKind::word_order;
      out.detail = WordOrderDetail{static_cast<int>(clean_span.size())};
      return out;
    }
  }

  // 9. Everything else: common word/phrase substitution, insertion, deletion.
  fallback();
  return out;
}

}  // namespace textnoise
