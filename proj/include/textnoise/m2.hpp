#pragma once

// M2 annotation format: parsing, canonical serialization, and the edit
// algebra (apply corrections, invert corrections into error-introducing
// edits). A file is a sequence of blocks separated by blank lines; each block
// is one "S <tokens>" line followed by zero or more annotation lines
//
//   A <start> <end>|||<type>|||<replacement>|||<required>|||<comment>|||<annotator>
//
// Spans are token offsets into the S line, end exclusive. "-NONE-" (or an
// empty field) as replacement means deletion. Edits with a -1 -1 span (noop
// and other zero-width markers) carry no correction and are dropped.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "textnoise/unicode.hpp"

namespace textnoise {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct Edit {
  int start = 0;
  int end = 0;  // exclusive; start == end is an insertion point
  std::vector<std::string> replacement;
  std::string error_type;
  int annotator = 0;

  bool is_insertion() const { return start == end; }
  int span_length() const { return end - start; }

  friend bool operator==(const Edit&, const Edit&) = default;
};

struct M2Sentence {
  std::vector<std::string> source_tokens;
  // Sorted by (annotator, start, end); non-overlapping within one annotator.
  std::vector<Edit> edits;

  std::vector<Edit> edits_for(int annotator) const {
    std::vector<Edit> out;
    for (const Edit& e : edits) {
      if (e.annotator == annotator) out.push_back(e);
    }
    return out;
  }

  std::set<int> annotators() const {
    std::set<int> out;
    for (const Edit& e : edits) out.insert(e.annotator);
    return out;
  }

  friend bool operator==(const M2Sentence&, const M2Sentence&) = default;
};

namespace detail {

inline std::vector<std::string> split_fields(std::string_view s, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.emplace_back(s.substr(pos));
      return out;
    }
    out.emplace_back(s.substr(pos, next - pos));
    pos = next + sep.size();
  }
}

inline std::vector<std::string> split_space_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  std::size_t i = 0;
  bool neg = false;
  if (s[0] == '-') {
    neg = true;
    i = 1;
    if (s.size() == 1) return false;
  }
  long long v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
    if (v > 1'000'000'000LL) return false;
  }
  out = static_cast<int>(neg ? -v : v);
  return true;
}

inline void check_token(const std::string& tok, std::size_t line, const char* where) {
  std::u32string cps;
  try {
    cps = uni::decode_utf8(tok);
  } catch (const uni::EncodingError& e) {
    throw ParseError(line, std::string(where) + ": " + e.what());
  }
  if (uni::has_whitespace(cps)) {
    throw ParseError(line, std::string(where) + " contains whitespace: '" + tok + "'");
  }
}

// Sort by (annotator, start, end) and reject overlaps / duplicate insertion
// points within one annotator.
inline void finalize_edits(M2Sentence& sent, std::size_t line) {
  std::stable_sort(sent.edits.begin(), sent.edits.end(), [](const Edit& a, const Edit& b) {
    return std::tie(a.annotator, a.start, a.end) < std::tie(b.annotator, b.start, b.end);
  });
  for (std::size_t i = 1; i < sent.edits.size(); ++i) {
    const Edit& prev = sent.edits[i - 1];
    const Edit& cur = sent.edits[i];
    if (prev.annotator != cur.annotator) continue;
    if (cur.start < prev.end) {
      throw ParseError(line, "overlapping edits for annotator " + std::to_string(cur.annotator));
    }
    if (prev.is_insertion() && cur.is_insertion() && prev.start == cur.start) {
      throw ParseError(line, "duplicate insertion point for annotator " +
                                 std::to_string(cur.annotator));
    }
  }
}

}  // namespace detail

inline std::vector<M2Sentence> parse_m2(std::string_view text) {
  std::vector<M2Sentence> out;
  M2Sentence current;
  bool in_block = false;
  std::size_t block_start_line = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto flush = [&] {
    if (!in_block) return;
    detail::finalize_edits(current, block_start_line);
    out.push_back(std::move(current));
    current = M2Sentence{};
    in_block = false;
  };

  while (pos <= text.size()) {
    if (pos == text.size() && line_no > 0) break;
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!uni::is_valid_utf8(line)) throw ParseError(line_no, "invalid UTF-8");

    if (line.empty()) {
      flush();
      continue;
    }
    if (line == "S" || line.rfind("S ", 0) == 0) {
      if (in_block) throw ParseError(line_no, "unexpected second S line in block");
      in_block = true;
      block_start_line = line_no;
      current.source_tokens = detail::split_space_tokens(line.size() > 1 ? line.substr(2) : "");
      for (const std::string& tok : current.source_tokens) {
        detail::check_token(tok, line_no, "source token");
      }
      continue;
    }
    if (line.rfind("A ", 0) == 0) {
      if (!in_block) throw ParseError(line_no, "A line before any S line");
      const auto fields = detail::split_fields(line.substr(2), "|||");
      if (fields.size() != 6) {
        throw ParseError(line_no, "expected 6 |||-separated fields, got " +
                                      std::to_string(fields.size()));
      }
      const auto span = detail::split_space_tokens(fields[0]);
      Edit e;
      if (span.size() != 2 || !detail::parse_int(span[0], e.start) ||
          !detail::parse_int(span[1], e.end)) {
        throw ParseError(line_no, "malformed edit span '" + fields[0] + "'");
      }
      // noop and other zero-width markers: no correction, drop.
      if (e.start == -1 && e.end == -1) continue;
      if (e.start < 0 || e.end < 0) throw ParseError(line_no, "negative edit span");
      if (e.start > e.end) throw ParseError(line_no, "edit start exceeds end");
      if (e.end > static_cast<int>(current.source_tokens.size())) {
        throw ParseError(line_no, "edit span out of range");
      }
      e.error_type = fields[1];
      if (!fields[2].empty() && fields[2] != "-NONE-") {
        e.replacement = detail::split_space_tokens(fields[2]);
        for (const std::string& tok : e.replacement) {
          detail::check_token(tok, line_no, "replacement token");
        }
      }
      if (!detail::parse_int(fields[5], e.annotator) || e.annotator < 0) {
        throw ParseError(line_no, "malformed annotator id '" + fields[5] + "'");
      }
      current.edits.push_back(std::move(e));
      continue;
    }
    throw ParseError(line_no, "unexpected line: '" + std::string(line) + "'");
  }
  flush();
  return out;
}

// Canonical form: required = REQUIRED, comment = -NONE-, empty replacement =
// -NONE-, one blank line after every block. parse(serialize(x)) == x.
inline std::string serialize_m2(const std::vector<M2Sentence>& sentences) {
  std::string out;
  for (const M2Sentence& sent : sentences) {
    out += 'S';
    for (const std::string& tok : sent.source_tokens) {
      out += ' ';
      out += tok;
    }
    out += '\n';
    for (const Edit& e : sent.edits) {
      out += "A ";
      out += std::to_string(e.start);
      out += ' ';
      out += std::to_string(e.end);
      out += "|||";
      out += e.error_type;
      out += "|||";
      if (e.replacement.empty()) {
        out += "-NONE-";
      } else {
        for (std::size_t i = 0; i < e.replacement.size(); ++i) {
          if (i > 0) out += ' ';
          out += e.replacement[i];
        }
      }
      out += "|||REQUIRED|||-NONE-|||";
      out += std::to_string(e.annotator);
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

inline std::string serialize_m2(const M2Sentence& sentence) {
  return serialize_m2(std::vector<M2Sentence>{sentence});
}

struct TokenSpan {
  int begin = 0;
  int end = 0;
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct ProvenanceEntry {
  TokenSpan corrected;
  TokenSpan source;
  bool edited = false;
  friend bool operator==(const ProvenanceEntry&, const ProvenanceEntry&) = default;
};

struct CorrectedSentence {
  std::vector<std::string> tokens;
  // Ordered, covers the source exactly; concatenating the source spans
  // reproduces source_tokens.
  std::vector<ProvenanceEntry> provenance;
};

// Apply one annotator's corrections. Offsets in the edits refer to the
// original source throughout, which is why a single left-to-right pass with a
// cursor (equivalent to right-to-left in-place application) is safe.
inline CorrectedSentence apply_edits(const M2Sentence& sent, int annotator = 0) {
  CorrectedSentence out;
  const auto edits = sent.edits_for(annotator);
  int cursor = 0;
  auto copy_gap = [&](int until) {
    if (until <= cursor) return;
    ProvenanceEntry p;
    p.source = {cursor, until};
    p.corrected.begin = static_cast<int>(out.tokens.size());
    for (int i = cursor; i < until; ++i) out.tokens.push_back(sent.source_tokens[i]);
    p.corrected.end = static_cast<int>(out.tokens.size());
    out.provenance.push_back(p);
    cursor = until;
  };
  for (const Edit& e : edits) {
    copy_gap(e.start);
    ProvenanceEntry p;
    p.edited = true;
    p.source = {e.start, e.end};
    p.corrected.begin = static_cast<int>(out.tokens.size());
    for (const std::string& tok : e.replacement) out.tokens.push_back(tok);
    p.corrected.end = static_cast<int>(out.tokens.size());
    out.provenance.push_back(p);
    cursor = e.end;
  }
  copy_gap(static_cast<int>(sent.source_tokens.size()));
  return out;
}

// Re-express corrections as error-introducing edits: returns the corrected
// (clean) tokens plus edits over them whose replacements are the original
// source spans. Applying the result reconstructs source_tokens exactly.
// Adjacent deletions would inverse-map to duplicate insertion points, so
// those are merged into one insertion.
inline std::pair<std::vector<std::string>, std::vector<Edit>> invert_edits(
    const M2Sentence& sent, int annotator = 0) {
  const CorrectedSentence corrected = apply_edits(sent, annotator);
  std::vector<Edit> inverted;
  for (const ProvenanceEntry& p : corrected.provenance) {
    if (!p.edited) continue;
    Edit e;
    e.start = p.corrected.begin;
    e.end = p.corrected.end;
    e.annotator = annotator;
    for (int i = p.source.begin; i < p.source.end; ++i) {
      e.replacement.push_back(sent.source_tokens[i]);
    }
    if (!inverted.empty()) {
      Edit& prev = inverted.back();
      if (prev.is_insertion() && e.is_insertion() && prev.start == e.start) {
        prev.replacement.insert(prev.replacement.end(), e.replacement.begin(),
                                e.replacement.end());
        continue;
      }
    }
    inverted.push_back(std::move(e));
  }
  return {corrected.tokens, std::move(inverted)};
}

}  // namespace textnoise
