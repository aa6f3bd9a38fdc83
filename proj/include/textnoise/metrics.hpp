#pragma once

// Independent measurement of achieved noisiness: token-level Levenshtein
// alignment between clean and noisy text, aggregated into the same two
// statistics a profile stores (mean and std of per-sentence edit rates).
//
// Token comparison is exact string equality after NFC normalization — no case
// folding, since casing errors must count as edits.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "textnoise/m2.hpp"
#include "textnoise/unicode.hpp"

namespace textnoise {

struct SentenceAlignment {
  std::size_t matches = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  double rate = 0.0;  // (S + I + D) / clean tokens, capped at 1

  std::size_t distance() const { return substitutions + insertions + deletions; }
  friend bool operator==(const SentenceAlignment&, const SentenceAlignment&) = default;
};

// Minimum-cost alignment with unit substitution/insertion/deletion costs.
// Backtrace ties prefer substitution (or match) over deletion over insertion,
// giving one deterministic leftmost alignment.
inline SentenceAlignment align_tokens(const std::vector<std::string>& clean,
                                      const std::vector<std::string>& noisy) {
  const std::size_t n = clean.size();
  const std::size_t m = noisy.size();
  std::vector<std::u32string> a(n), b(m);
  for (std::size_t i = 0; i < n; ++i) a[i] = uni::nfc(uni::decode_utf8(clean[i]));
  for (std::size_t j = 0; j < m; ++j) b[j] = uni::nfc(uni::decode_utf8(noisy[j]));

  std::vector<std::vector<std::uint32_t>> d(n + 1, std::vector<std::uint32_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<std::uint32_t>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      const std::uint32_t del = d[i - 1][j] + 1;
      const std::uint32_t ins = d[i][j - 1] + 1;
      d[i][j] = std::min(sub, std::min(del, ins));
    }
  }

  SentenceAlignment out;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)) {
      if (a[i - 1] == b[j - 1]) {
        ++out.matches;
      } else {
        ++out.substitutions;
      }
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++out.deletions;
      --i;
    } else {
      ++out.insertions;
      --j;
    }
  }

  const double denom = static_cast<double>(n == 0 ? 1 : n);
  const double rate = static_cast<double>(out.distance()) / denom;
  out.rate = rate > 1.0 ? 1.0 : rate;
  return out;
}

struct CorpusReport {
  std::size_t sentences = 0;
  std::size_t clean_tokens = 0;
  std::size_t matches = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  double mean_rate = 0.0;  // mean of per-sentence rates
  double std_rate = 0.0;   // population standard deviation of those rates
  friend bool operator==(const CorpusReport&, const CorpusReport&) = default;
};

class MeasureError : public std::runtime_error {
 public:
  explicit MeasureError(const std::string& what) : std::runtime_error(what) {}
};

namespace metrics_detail {

struct Aggregate {
  CorpusReport report;
  double rate_sum = 0.0;
  double rate_sum_sq = 0.0;

  void add(std::size_t clean_len, const SentenceAlignment& al) {
    ++report.sentences;
    report.clean_tokens += clean_len;
    report.matches += al.matches;
    report.substitutions += al.substitutions;
    report.insertions += al.insertions;
    report.deletions += al.deletions;
    rate_sum += al.rate;
    rate_sum_sq += al.rate * al.rate;
  }

  CorpusReport finish() {
    if (report.sentences > 0) {
      const double n = static_cast<double>(report.sentences);
      report.mean_rate = rate_sum / n;
      const double var = rate_sum_sq / n - report.mean_rate * report.mean_rate;
      report.std_rate = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return report;
  }
};

}  // namespace metrics_detail

inline CorpusReport measure_corpus(const std::vector<std::vector<std::string>>& clean,
                                   const std::vector<std::vector<std::string>>& noisy) {
  if (clean.size() != noisy.size()) {
    throw MeasureError("line count mismatch: clean has " + std::to_string(clean.size()) +
                       " lines, noisy has " + std::to_string(noisy.size()) + " lines");
  }
  metrics_detail::Aggregate agg;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    agg.add(clean[i].size(), align_tokens(clean[i], noisy[i]));
  }
  return agg.finish();
}

// Plain-text splitter (frozen): tokens are maximal runs of non-whitespace
// characters of one class, where punctuation characters and everything else
// form separate classes. "Hello, world!" -> ["Hello", ",", "world", "!"].
inline std::vector<std::string> split_plain_text(const std::string& line) {
  std::vector<std::string> out;
  std::u32string current;
  int current_class = -1;  // 0 = punctuation, 1 = other
  auto flush = [&]() {
    if (!current.empty()) {
      out.push_back(uni::encode_utf8(current));
      current.clear();
    }
  };
  for (char32_t c : uni::decode_utf8(line)) {
    if (uni::is_whitespace(c)) {
      flush();
      current_class = -1;
      continue;
    }
    const int cls = uni::is_punct(c) ? 0 : 1;
    if (cls != current_class) flush();
    current_class = cls;
    current.push_back(c);
  }
  flush();
  return out;
}

// Measure two line-aligned streams. `plain` applies the plain-text splitter
// to both sides; otherwise lines are pre-tokenized (single spaces).
inline CorpusReport measure_streams(std::istream& clean_in, std::istream& noisy_in,
                                    bool plain = false) {
  metrics_detail::Aggregate agg;
  std::string cline, nline;
  std::size_t clean_lines = 0, noisy_lines = 0;
  while (true) {
    const bool has_clean = static_cast<bool>(std::getline(clean_in, cline));
    const bool has_noisy = static_cast<bool>(std::getline(noisy_in, nline));
    if (has_clean) ++clean_lines;
    if (has_noisy) ++noisy_lines;
    if (!has_clean || !has_noisy) {
      // Drain so the mismatch error reports true counts.
      while (std::getline(clean_in, cline)) ++clean_lines;
      while (std::getline(noisy_in, nline)) ++noisy_lines;
      break;
    }
    if (!cline.empty() && cline.back() == '\r') cline.pop_back();
    if (!nline.empty() && nline.back() == '\r') nline.pop_back();
    const auto ctoks = plain ? split_plain_text(cline) : detail::split_space_tokens(cline);
    const auto ntoks = plain ? split_plain_text(nline) : detail::split_space_tokens(nline);
    agg.add(ctoks.size(), align_tokens(ctoks, ntoks));
  }
  if (clean_lines != noisy_lines) {
    throw MeasureError("line count mismatch: clean has " + std::to_string(clean_lines) +
                       " lines, noisy has " + std::to_string(noisy_lines) + " lines");
  }
  return agg.finish();
}

// Frozen JSON report schema.
inline nlohmann::json report_json(const CorpusReport& r) {
  nlohmann::json j;
  j["sentences"] = r.sentences;
  j["clean_tokens"] = r.clean_tokens;
  j["matches"] = r.matches;
  j["substitutions"] = r.substitutions;
  j["insertions"] = r.insertions;
  j["deletions"] = r.deletions;
  j["mean_rate"] = r.mean_rate;
  j["std_rate"] = r.std_rate;
  return j;
}

inline std::string report_text(const CorpusReport& r) {
  char buf[64];
  std::string out;
  out += "sentences:     " + std::to_string(r.sentences) + "\n";
  out += "clean tokens:  " + std::to_string(r.clean_tokens) + "\n";
  out += "matches:       " + std::to_string(r.matches) + "\n";
  out += "substitutions: " + std::to_string(r.substitutions) + "\n";
  out += "insertions:    " + std::to_string(r.insertions) + "\n";
  out += "deletions:     " + std::to_string(r.deletions) + "\n";
  std::snprintf(buf, sizeof(buf), "%.4f", r.mean_rate);
  out += "mean rate:     " + std::string(buf) + "\n";
  std::snprintf(buf, sizeof(buf), "%.4f", r.std_rate);
  out += "std rate:      " + std::string(buf) + "\n";
  return out;
}

}  // namespace textnoise
