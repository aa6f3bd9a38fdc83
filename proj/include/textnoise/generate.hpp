#pragma once

// Generative side of the aspects: a working-sentence model that tracks, for
// every produced token, which clean span it came from and whether an aspect
// already edited it, plus one operator per aspect kind.
//
// Two rules keep generation statistically consistent with estimation:
//
//  * Aspects never stack: an operator only touches unclaimed tokens, and its
//    per-unit trigger is boosted by (total units / available units) so the
//    expected number of edits per aspect is unchanged by earlier claims.
//  * Self-consistency: operators whose output pair might classify onto a
//    different aspect (spelling, affix, word order) re-classify the candidate
//    and retry on mismatch, so re-estimating emitted annotations recovers the
//    trigger probabilities that generated them.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "textnoise/aspects.hpp"
#include "textnoise/rng.hpp"
#include "textnoise/unicode.hpp"

namespace textnoise {

struct WorkingToken {
  std::u32string text;
  int clean_begin = 0;
  int clean_end = 0;   // empty span (g, g) for inserted tokens
  bool claimed = false;
  bool deleted = false;
  int group = -1;      // edit-group id; -1 while pristine
};

struct WorkingSentence {
  std::vector<std::u32string> clean;  // NFC tokens
  std::vector<WorkingToken> tokens;
  std::vector<AspectKind> group_kinds;

  int new_group(AspectKind k) {
    group_kinds.push_back(k);
    return static_cast<int>(group_kinds.size()) - 1;
  }

  void claim(WorkingToken& t, int group) {
    t.claimed = true;
    t.group = group;
  }
};

inline WorkingSentence make_working(const std::vector<std::string>& utf8_tokens) {
  WorkingSentence ws;
  ws.clean.reserve(utf8_tokens.size());
  ws.tokens.reserve(utf8_tokens.size());
  for (std::size_t i = 0; i < utf8_tokens.size(); ++i) {
    std::u32string t = uni::nfc(uni::decode_utf8(utf8_tokens[i]));
    WorkingToken wt;
    wt.text = t;
    wt.clean_begin = static_cast<int>(i);
    wt.clean_end = static_cast<int>(i) + 1;
    ws.tokens.push_back(std::move(wt));
    ws.clean.push_back(std::move(t));
  }
  return ws;
}

inline std::vector<std::string> visible_utf8(const WorkingSentence& ws) {
  std::vector<std::string> out;
  for (const WorkingToken& t : ws.tokens) {
    if (!t.deleted) out.push_back(uni::encode_utf8(t.text));
  }
  return out;
}

// Estimation units of one clean sentence; the denominators both sides of the
// estimate/generate loop count the same way.
struct UnitTotals {
  std::size_t words = 0;
  std::size_t alpha_words = 0;      // tokens containing a letter
  std::size_t cased_first = 0;      // tokens whose first character is cased
  std::size_t nonfirst_cased = 0;   // cased characters past each token's first
  std::size_t dia_chars = 0;        // characters carrying combining marks
  std::size_t punct_tokens = 0;     // punctuation-only tokens
  std::size_t splittable = 0;       // tokens of >= 2 characters
  std::size_t gaps = 0;             // words + 1
  std::size_t internal_gaps = 0;    // words - 1 (0 for empty)
};

inline UnitTotals count_units(const std::vector<std::u32string>& clean) {
  UnitTotals u;
  u.words = clean.size();
  for (const std::u32string& t : clean) {
    if (uni::has_letter(t)) ++u.alpha_words;
    if (!t.empty() && uni::is_cased(t[0])) ++u.cased_first;
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (uni::is_cased(t[i])) ++u.nonfirst_cased;
    }
    for (char32_t c : t) {
      if (uni::has_marks(c)) ++u.dia_chars;
    }
    if (uni::is_punct_token(t)) ++u.punct_tokens;
    if (t.size() >= 2) ++u.splittable;
  }
  u.gaps = clean.size() + 1;
  u.internal_gaps = clean.empty() ? 0 : clean.size() - 1;
  return u;
}

// Length-bucketed lexicon for distance-2 neighbor lookups.
struct LexiconIndex {
  std::map<std::size_t, std::vector<std::pair<std::u32string, double>>> by_len;

  static LexiconIndex build(const Lexicon& lex) {
    LexiconIndex idx;
    for (const auto& [word, count] : lex) {
      std::u32string w = uni::nfc(uni::decode_utf8(word));
      idx.by_len[w.size()].emplace_back(std::move(w), static_cast<double>(count));
    }
    return idx;
  }

  std::vector<std::pair<std::u32string, double>> neighbors(const std::u32string& w) const {
    std::vector<std::pair<std::u32string, double>> out;
    const std::size_t len = w.size();
    const std::size_t lo = len > 2 ? len - 2 : 1;
    for (std::size_t l = lo; l <= len + 2; ++l) {
      auto it = by_len.find(l);
      if (it == by_len.end()) continue;
      for (const auto& [cand, weight] : it->second) {
        if (cand == w) continue;
        if (osa_distance(w, cand, 2) <= 2) out.emplace_back(cand, weight);
      }
    }
    return out;
  }
};

struct GenerationContext {
  const AspectStatsSet& stats;
  const LexiconIndex& lexicon_index;
  double factor = 1.0;  // per-sentence rescale of trigger probabilities
  Rng& rng;
};

namespace gen_detail {

constexpr int kMaxRetries = 8;

inline double clamp01(double p) { return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p); }

// Trigger probability per available unit, compensated so the expected number
// of edits stays p * factor * total even after earlier aspects claimed units.
inline double boosted(double p, double factor, std::size_t total, std::size_t avail) {
  if (avail == 0 || total == 0) return 0.0;
  return clamp01(p * factor * static_cast<double>(total) / static_cast<double>(avail));
}

inline bool reclassifies_as(const std::vector<std::string>& clean_span,
                            const std::vector<std::string>& noisy, AspectKind want,
                            const Lexicon& lexicon) {
  Edit e;
  e.start = 0;
  e.end = static_cast<int>(clean_span.size());
  e.replacement = noisy;
  return classify_edit(clean_span, e, lexicon).kind == want;
}

inline bool reclassifies_single(const std::u32string& clean, const std::u32string& noisy,
                                AspectKind want, const Lexicon& lexicon) {
  return reclassifies_as({uni::encode_utf8(clean)}, {uni::encode_utf8(noisy)}, want, lexicon);
}

// Indices of visible (non-deleted) tokens, in order.
inline std::vector<std::size_t> visible_indices(const WorkingSentence& ws) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ws.tokens.size(); ++i) {
    if (!ws.tokens[i].deleted) out.push_back(i);
  }
  return out;
}

inline char32_t sample_alphabet_char(const std::u32string& alphabet, Rng& rng,
                                     char32_t exclude = 0) {
  if (alphabet.empty()) return 0;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    const char32_t c = alphabet[rng.below(alphabet.size())];
    if (c != exclude && !uni::is_whitespace(c)) return c;
  }
  return 0;
}

inline char32_t sample_char_dist(const ProbMap& dist, Rng& rng) {
  if (dist.empty()) return 0;
  const std::string& key = sample_key(dist, rng);
  const std::u32string cps = uni::decode_utf8(key);
  return cps.size() == 1 ? cps[0] : 0;
}

// Sample (key, replacement) from a joint pair table restricted to the keys in
// `applicable` (indices into the table). Weight = row mass.
inline std::optional<std::pair<std::string, std::string>> sample_pair_table(
    const PairTable& table, const std::vector<const std::string*>& applicable, Rng& rng) {
  if (applicable.empty()) return std::nullopt;
  std::vector<double> weights;
  weights.reserve(applicable.size());
  for (const std::string* key : applicable) {
    double mass = 0.0;
    for (const auto& [value, p] : table.at(*key)) mass += p;
    weights.push_back(mass);
  }
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) return std::nullopt;
  const std::size_t pick = rng.categorical(weights);
  const std::string& key = *applicable[pick];
  return std::make_pair(key, sample_key(table.at(key), rng));
}

}  // namespace gen_detail

// ---- 1. diacritics ------------------------------------------------------

inline void generate_diacritics(WorkingSentence& ws, const DiacriticsStats& st,
                                const UnitTotals& totals, double factor, Rng& rng) {
  if (totals.dia_chars == 0) return;

  if (rng.bernoulli(gen_detail::clamp01(st.p_sentence * factor))) {
    for (WorkingToken& t : ws.tokens) {
      if (t.deleted || t.claimed) continue;
      const std::u32string stripped = strip_diacritics_pass(t.text);
      if (stripped != t.text) {
        t.text = stripped;
        ws.claim(t, ws.new_group(AspectKind::diacritics));
      }
    }
    return;
  }

  std::size_t avail = 0;
  for (const WorkingToken& t : ws.tokens) {
    if (t.deleted || t.claimed) continue;
    for (char32_t c : t.text) {
      if (uni::has_marks(c)) ++avail;
    }
  }
  const double q = gen_detail::boosted(st.p_char, factor, totals.dia_chars, avail);
  if (q <= 0.0) return;
  for (WorkingToken& t : ws.tokens) {
    if (t.deleted || t.claimed) continue;
    std::u32string out;
    out.reserve(t.text.size());
    bool changed = false;
    for (char32_t c : t.text) {
      if (uni::has_marks(c) && rng.bernoulli(q)) {
        out += uni::strip_marks_char(c);
        changed = true;
      } else {
        out.push_back(c);
      }
    }
    if (changed) {
      t.text = std::move(out);
      ws.claim(t, ws.new_group(AspectKind::diacritics));
    }
  }
}

// ---- 2. casing ----------------------------------------------------------

inline void generate_casing(WorkingSentence& ws, const CasingStats& st,
                            const UnitTotals& totals, double factor, Rng& rng) {
  std::size_t avail_first = 0, avail_other = 0;
  for (const WorkingToken& t : ws.tokens) {
    if (t.deleted || t.claimed || t.text.empty()) continue;
    if (uni::is_cased(t.text[0])) ++avail_first;
    for (std::size_t i = 1; i < t.text.size(); ++i) {
      if (uni::is_cased(t.text[i])) ++avail_other;
    }
  }
  const double q_first = gen_detail::boosted(st.p_first, factor, totals.cased_first, avail_first);
  const double q_other =
      gen_detail::boosted(st.p_other, factor, totals.nonfirst_cased, avail_other);
  if (q_first <= 0.0 && q_other <= 0.0) return;

  for (WorkingToken& t : ws.tokens) {
    if (t.deleted || t.claimed || t.text.empty()) continue;
    std::u32string out = t.text;
    bool changed = false;
    if (uni::is_cased(out[0]) && rng.bernoulli(q_first)) {
      out[0] = uni::flip_case(out[0]);
      changed = changed || out[0] != t.text[0];
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
      if (uni::is_cased(out[i]) && rng.bernoulli(q_other)) {
        out[i] = uni::flip_case(out[i]);
        changed = changed || out[i] != t.text[i];
      }
    }
    if (changed) {
      t.text = std::move(out);
      ws.claim(t, ws.new_group(AspectKind::casing));
    }
  }
}

// ---- 3. spelling ----------------------------------------------------------

inline void generate_spelling(WorkingSentence& ws, const SpellingStats& st,
                              const GenerationContext& ctx, const UnitTotals& totals,
                              Rng& rng) {
  std::vector<std::size_t> avail;
  for (std::size_t i = 0; i < ws.tokens.size(); ++i) {
    const WorkingToken& t = ws.tokens[i];
    if (!t.deleted && !t.claimed && uni::has_letter(t.text)) avail.push_back(i);
  }
  const double q =
      gen_detail::boosted(st.p_word, ctx.factor, totals.alpha_words, avail.size());
  if (q <= 0.0 || st.ops.empty()) return;

  for (std::size_t idx : avail) {
    if (!rng.bernoulli(q)) continue;
    WorkingToken& t = ws.tokens[idx];
    const std::u32string& word = t.text;

    // Candidates that would not classify back to spelling (a one-letter
    // change near a word edge reads as an affix change, for example) are
    // filtered out up front, so any drawn op succeeds whenever the word
    // admits at least one valid position for it.
    auto keeps_class = [&](const std::u32string& cand) {
      return cand != word && gen_detail::reclassifies_single(word, cand, AspectKind::spelling,
                                                             ctx.stats.lexicon);
    };

    for (int attempt = 0; attempt < gen_detail::kMaxRetries; ++attempt) {
      const std::string& op = sample_key(st.ops, rng);
      std::vector<std::u32string> valid;

      if (op == kOpInsert) {
        char32_t c = gen_detail::sample_char_dist(st.insert_chars, rng);
        if (c == 0 || uni::is_whitespace(c)) {
          c = gen_detail::sample_alphabet_char(ctx.stats.alphabet, rng);
        }
        if (c == 0) continue;
        for (std::size_t pos = 0; pos <= word.size(); ++pos) {
          std::u32string cand = word;
          cand.insert(cand.begin() + pos, c);
          if (keeps_class(cand)) valid.push_back(std::move(cand));
        }
      } else if (op == kOpRemove) {
        if (word.size() < 2) continue;
        for (std::size_t pos = 0; pos < word.size(); ++pos) {
          std::u32string cand = word;
          cand.erase(cand.begin() + pos);
          if (keeps_class(cand)) valid.push_back(std::move(cand));
        }
      } else if (op == kOpReplace) {
        char32_t from = 0;
        char32_t to = 0;
        std::vector<const std::string*> all_keys;
        for (const auto& [key, row] : st.replace_pairs) all_keys.push_back(&key);
        if (const auto pair = gen_detail::sample_pair_table(st.replace_pairs, all_keys, rng)) {
          const std::u32string f = uni::decode_utf8(pair->first);
          const std::u32string s = uni::decode_utf8(pair->second);
          if (f.size() == 1 && s.size() == 1) {
            from = f[0];
            to = s[0];
          }
        }
        if (to == 0 || to == from || uni::is_whitespace(to)) {
          from = 0;  // fall back to any position, any alphabet letter
          to = gen_detail::sample_alphabet_char(ctx.stats.alphabet, rng);
        }
        if (to == 0) continue;
        for (std::size_t pos = 0; pos < word.size(); ++pos) {
          if (from != 0 ? word[pos] != from : word[pos] == to) continue;
          std::u32string cand = word;
          cand[pos] = to;
          if (keeps_class(cand)) valid.push_back(std::move(cand));
        }
      } else if (op == kOpSwap) {
        if (word.size() < 2) continue;
        for (std::size_t pos = 0; pos + 1 < word.size(); ++pos) {
          if (word[pos] == word[pos + 1]) continue;
          std::u32string cand = word;
          std::swap(cand[pos], cand[pos + 1]);
          if (keeps_class(cand)) valid.push_back(std::move(cand));
        }
      } else {  // word_confusion
        const auto neighbors = ctx.lexicon_index.neighbors(word);
        std::vector<double> weights;
        for (const auto& [w, c] : neighbors) {
          if (!keeps_class(w)) continue;
          valid.push_back(w);
          weights.push_back(c);
        }
        if (!valid.empty()) {
          t.text = valid[rng.categorical(weights)];
          ws.claim(t, ws.new_group(AspectKind::spelling));
          break;
        }
        continue;
      }

      if (valid.empty()) continue;
      t.text = valid[rng.below(valid.size())];
      ws.claim(t, ws.new_group(AspectKind::spelling));
      break;
    }
  }
}

// ---- 4. affix -------------------------------------------------------------

namespace gen_detail {

inline bool ends_with(const std::u32string& s, const std::u32string& suffix) {
  return s.size() >= suffix.size() &&
         std::equal(suffix.rbegin(), suffix.rend(), s.rbegin());
}

inline bool starts_with(const std::u32string& s, const std::u32string& prefix) {
  return s.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), s.begin());
}

// One attempt at replacing a suffix (or prefix) drawn from the table.
inline std::optional<std::u32string> try_affix_branch(const std::u32string& word,
                                                      const PairTable& table, bool suffix,
                                                      const Lexicon& lexicon, Rng& rng) {
  std::vector<const std::string*> applicable;
  std::vector<std::u32string> applicable_u32;
  for (const auto& [key, row] : table) {
    const std::u32string k = uni::decode_utf8(key);
    const bool matches = suffix ? ends_with(word, k) : starts_with(word, k);
    if (!matches) continue;
    if (word.size() - k.size() < 2) continue;  // keep a usable stem
    applicable.push_back(&key);
    applicable_u32.push_back(k);
  }
  if (applicable.empty()) return std::nullopt;

  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    const auto pick = sample_pair_table(table, applicable, rng);
    if (!pick) return std::nullopt;
    const std::u32string affix = uni::decode_utf8(pick->first);
    const std::u32string repl = uni::decode_utf8(pick->second);
    if (affix == repl) continue;
    std::u32string cand;
    if (suffix) {
      cand = word.substr(0, word.size() - affix.size()) + repl;
    } else {
      cand = repl + word.substr(affix.size());
    }
    if (cand.empty() || cand == word) continue;
    if (!reclassifies_single(word, cand, AspectKind::affix, lexicon)) continue;
    return cand;
  }
  return std::nullopt;
}

}  // namespace gen_detail

inline void generate_affix(WorkingSentence& ws, const AffixStats& st,
                           const GenerationContext& ctx, const UnitTotals& totals, Rng& rng) {
  std::vector<std::size_t> avail;
  for (std::size_t i = 0; i < ws.tokens.size(); ++i) {
    const WorkingToken& t = ws.tokens[i];
    if (!t.deleted && !t.claimed && uni::has_letter(t.text)) avail.push_back(i);
  }
  const double q =
      gen_detail::boosted(st.p_word, ctx.factor, totals.alpha_words, avail.size());
  if (q <= 0.0) return;

  for (std::size_t idx : avail) {
    if (!rng.bernoulli(q)) continue;
    WorkingToken& t = ws.tokens[idx];
    const bool suffix_first = rng.bernoulli(st.p_suffix);
    auto cand = gen_detail::try_affix_branch(
        t.text, suffix_first ? st.suffix_table : st.prefix_table, suffix_first,
        ctx.stats.lexicon, rng);
    if (!cand) {
      cand = gen_detail::try_affix_branch(
          t.text, suffix_first ? st.prefix_table : st.suffix_table, !suffix_first,
          ctx.stats.lexicon, rng);
    }
    if (!cand) continue;
    t.text = std::move(*cand);
    ws.claim(t, ws.new_group(AspectKind::affix));
  }
}

// ---- helpers shared by the tokenization-changing aspects ------------------

namespace gen_detail {

// Gap descriptor: insertion position in the token vector plus the clean-token
// anchor. A gap is usable only where the neighbouring spans touch (exact
// provenance) and the neighbours belong to different edit groups — inserting
// inside one group's token run would entangle its span with the insertion's.
struct Gap {
  std::size_t vec_pos = 0;
  int anchor = 0;
};

inline std::vector<Gap> anchored_gaps(const WorkingSentence& ws) {
  std::vector<Gap> out;
  const std::size_t n_clean = ws.clean.size();
  for (std::size_t pos = 0; pos <= ws.tokens.size(); ++pos) {
    const int left_end =
        pos == 0 ? 0 : ws.tokens[pos - 1].clean_end;
    const int right_begin =
        pos == ws.tokens.size() ? static_cast<int>(n_clean) : ws.tokens[pos].clean_begin;
    if (left_end != right_begin) continue;
    if (pos > 0 && pos < ws.tokens.size() && ws.tokens[pos - 1].group >= 0 &&
        ws.tokens[pos - 1].group == ws.tokens[pos].group) {
      continue;
    }
    out.push_back({pos, left_end});
  }
  return out;
}

inline WorkingToken make_inserted(std::u32string text, int anchor, int group) {
  WorkingToken t;
  t.text = std::move(text);
  t.clean_begin = anchor;
  t.clean_end = anchor;
  t.claimed = true;
  t.group = group;
  return t;
}

}  // namespace gen_detail

// ---- 5. punctuation --------------------------------------------------------

inline void generate_punctuation(WorkingSentence& ws, const PunctuationStats& st,
                                 const UnitTotals& totals, double factor, Rng& rng) {
  // Removals / replacements over the punctuation tokens present now.
  std::vector<std::size_t> punct;
  for (std::size_t i = 0; i < ws.tokens.size(); ++i) {
    const WorkingToken& t = ws.tokens[i];
    if (!t.deleted && !t.claimed && uni::is_punct_token(t.text)) punct.push_back(i);
  }
  const double q_remove =
      gen_detail::boosted(st.p_remove, factor, totals.punct_tokens, punct.size());
  const double q_replace =
      gen_detail::boosted(st.p_replace, factor, totals.punct_tokens, punct.size());
  for (std::size_t idx : punct) {
    WorkingToken& t = ws.tokens[idx];
    if (rng.bernoulli(q_remove)) {
      t.deleted = true;
      ws.claim(t, ws.new_group(AspectKind::punctuation));
      continue;
    }
    if (!rng.bernoulli(q_replace)) continue;
    const std::string cur = uni::encode_utf8(t.text);
    std::string repl;
    const auto row = st.replace_pairs.find(cur);
    if (row != st.replace_pairs.end() && !row->second.empty()) {
      repl = sample_key(row->second, rng);
    } else if (!st.insert_tokens.empty()) {
      repl = sample_key(st.insert_tokens, rng);
    }
    if (repl.empty() || repl == cur) continue;
    const std::u32string repl_u32 = uni::nfc(uni::decode_utf8(repl));
    if (!uni::is_punct_token(repl_u32)) continue;
    t.text = repl_u32;
    ws.claim(t, ws.new_group(AspectKind::punctuation));
  }

  // Insertions, one Bernoulli per anchored gap (snapshot before inserting).
  if (st.insert_tokens.empty()) return;
  const auto gaps = gen_detail::anchored_gaps(ws);
  const double q_insert = gen_detail::boosted(st.p_insert, factor, totals.gaps, gaps.size());
  if (q_insert <= 0.0) return;
  std::size_t inserted = 0;
  for (const auto& gap : gaps) {
    if (!rng.bernoulli(q_insert)) continue;
    const std::string tok = sample_key(st.insert_tokens, rng);
    const std::u32string tok_u32 = uni::nfc(uni::decode_utf8(tok));
    if (tok_u32.empty() || !uni::is_punct_token(tok_u32)) continue;
    const int group = ws.new_group(AspectKind::punctuation);
    ws.tokens.insert(ws.tokens.begin() + gap.vec_pos + inserted,
                     gen_detail::make_inserted(tok_u32, gap.anchor, group));
    ++inserted;
  }
}

// ---- 6. whitespace ---------------------------------------------------------

inline void generate_whitespace(WorkingSentence& ws, const WhitespaceStats& st,
                                const UnitTotals& totals, double factor, Rng& rng) {
  // Joins: adjacent visible, unclaimed, clean-contiguous token pairs.
  const auto visible = gen_detail::visible_indices(ws);
  auto joinable = [&](std::size_t a, std::size_t b) {
    const WorkingToken& u = ws.tokens[a];
    const WorkingToken& v = ws.tokens[b];
    return !u.claimed && !v.claimed && u.clean_end == v.clean_begin;
  };
  std::size_t avail_joins = 0;
  for (std::size_t k = 0; k + 1 < visible.size(); ++k) {
    if (joinable(visible[k], visible[k + 1])) ++avail_joins;
  }
  const double q_join =
      gen_detail::boosted(st.p_join, factor, totals.internal_gaps, avail_joins);
  if (q_join > 0.0) {
    for (std::size_t k = 0; k + 1 < visible.size(); ++k) {
      if (!joinable(visible[k], visible[k + 1])) continue;
      if (!rng.bernoulli(q_join)) continue;
      WorkingToken& u = ws.tokens[visible[k]];
      WorkingToken& v = ws.tokens[visible[k + 1]];
      const int group = ws.new_group(AspectKind::whitespace);
      u.text += v.text;
      u.clean_end = v.clean_end;
      ws.claim(u, group);
      v.deleted = true;
      ws.claim(v, group);
      ++k;  // the right token is consumed
    }
  }

  // Splits: insert a space inside a token of >= 2 characters.
  std::vector<std::size_t> splittable;
  for (std::size_t i = 0; i < ws.tokens.size(); ++i) {
    const WorkingToken& t = ws.tokens[i];
    if (!t.deleted && !t.claimed && t.text.size() >= 2) splittable.push_back(i);
  }
  const double q_split =
      gen_detail::boosted(st.p_split, factor, totals.splittable, splittable.size());
  if (q_split <= 0.0) return;
  std::size_t inserted = 0;
  for (std::size_t idx : splittable) {
    if (!rng.bernoulli(q_split)) continue;
    WorkingToken& t = ws.tokens[idx + inserted];
    const std::size_t cut = 1 + rng.below(t.text.size() - 1);
    const int group = ws.new_group(AspectKind::whitespace);
    WorkingToken right;
    right.text = t.text.substr(cut);
    right.clean_begin = t.clean_end;
    right.clean_end = t.clean_end;
    right.claimed = true;
    right.group = group;
    t.text = t.text.substr(0, cut);
    ws.claim(t, group);
    ws.tokens.insert(ws.tokens.begin() + idx + inserted + 1, std::move(right));
    ++inserted;
  }
}

// ---- 7. word order ----------------------------------------------------------

namespace gen_detail {

inline const std::vector<std::vector<std::size_t>>& permutations_of(std::size_t w) {
  static const auto make = [](std::size_t n) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    do {
      out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
  };
  static const std::vector<std::vector<std::size_t>> p2 = make(2);
  static const std::vector<std::vector<std::size_t>> p3 = make(3);
  static const std::vector<std::vector<std::size_t>> p4 = make(4);
  switch (w) {
    case 2: return p2;
    case 3: return p3;
    default: return p4;
  }
}

}  // namespace gen_detail

inline void generate_word_order(WorkingSentence& ws, const WordOrderStats& st,
                                const GenerationContext& ctx, Rng& rng) {
  const double p = gen_detail::clamp01(st.p_sentence * ctx.factor);
  if (p <= 0.0 || st.window_sizes.empty() || !rng.bernoulli(p)) return;

  const auto visible = gen_detail::visible_indices(ws);
  // Window starts: w consecutive visible tokens, unclaimed and contiguous in
  // the clean sentence. Indexes into `visible`.
  auto starts_for = [&](std::size_t w) {
    std::vector<std::size_t> starts;
    for (std::size_t k = 0; k + w <= visible.size(); ++k) {
      bool ok = true;
      for (std::size_t i = 0; i < w && ok; ++i) {
        const WorkingToken& t = ws.tokens[visible[k + i]];
        ok = !t.claimed;
        if (ok && i > 0) {
          ok = ws.tokens[visible[k + i - 1]].clean_end == t.clean_begin;
        }
      }
      if (ok) starts.push_back(k);
    }
    return starts;
  };

  // Restrict the size distribution to windows that actually fit; otherwise a
  // short sentence would silently drop the whole event whenever the drawn
  // size happens to be too wide for it.
  ProbMap feasible;
  for (const auto& [key, prob] : st.window_sizes) {
    const std::size_t w = static_cast<std::size_t>(std::stoi(key));
    if (w >= 2 && w <= 4 && !starts_for(w).empty()) feasible.emplace(key, prob);
  }
  if (feasible.empty()) return;

  for (int attempt = 0; attempt < gen_detail::kMaxRetries; ++attempt) {
    const std::string& size_key = sample_key(feasible, rng);
    const std::size_t w = static_cast<std::size_t>(std::stoi(size_key));

    const auto starts = starts_for(w);
    if (starts.empty()) continue;  // unreachable after the filter; stay safe

    const std::size_t start = starts[rng.below(starts.size())];
    const auto& perms = gen_detail::permutations_of(w);
    const auto& perm = perms[1 + rng.below(perms.size() - 1)];  // skip identity

    std::vector<std::u32string> before, after;
    for (std::size_t i = 0; i < w; ++i) before.push_back(ws.tokens[visible[start + i]].text);
    for (std::size_t i = 0; i < w; ++i) after.push_back(before[perm[i]]);
    if (after == before) continue;

    std::vector<std::string> clean_span, noisy_span;
    for (const auto& t : before) clean_span.push_back(uni::encode_utf8(t));
    for (const auto& t : after) noisy_span.push_back(uni::encode_utf8(t));
    if (!gen_detail::reclassifies_as(clean_span, noisy_span, AspectKind::word_order,
                                     ctx.stats.lexicon)) {
      continue;
    }

    std::vector<WorkingToken> window;
    for (std::size_t i = 0; i < w; ++i) window.push_back(ws.tokens[visible[start + i]]);
    const int group = ws.new_group(AspectKind::word_order);
    for (std::size_t i = 0; i < w; ++i) {
      WorkingToken& slot = ws.tokens[visible[start + i]];
      slot = window[perm[i]];
      ws.claim(slot, group);
    }
    return;
  }
}

// ---- 8. common word/phrase substitutions ------------------------------------

inline void generate_common_other(WorkingSentence& ws, const CommonOtherStats& st,
                                  const UnitTotals& totals, double factor, Rng& rng) {
  // Phrase replacements / deletions. Only positions where the phrase table
  // has a (longest) match can produce an edit, so the per-word trigger is
  // compensated by the candidate count: the expected number of edits stays
  // p_word * factor * words no matter how sparsely the table matches.
  if (!st.phrase_table.empty()) {
    struct Candidate {
      std::vector<std::size_t> span;  // vector positions of the matched tokens
      const ProbMap* row = nullptr;
      std::string phrase;
    };
    std::vector<Candidate> candidates;
    for (std::size_t pos = 0; pos < ws.tokens.size(); ++pos) {
      const WorkingToken& head = ws.tokens[pos];
      if (head.deleted || head.claimed) continue;
      for (std::size_t len = 3; len >= 1; --len) {
        // Collect `len` consecutive visible tokens starting at `pos`.
        std::vector<std::size_t> span;
        for (std::size_t i = pos; i < ws.tokens.size() && span.size() < len; ++i) {
          if (!ws.tokens[i].deleted) span.push_back(i);
        }
        if (span.size() < len) continue;
        bool ok = true;
        std::string phrase;
        for (std::size_t i = 0; i < len && ok; ++i) {
          const WorkingToken& t = ws.tokens[span[i]];
          ok = !t.claimed;
          if (ok && i > 0) {
            ok = ws.tokens[span[i - 1]].clean_end == t.clean_begin;
          }
          if (ok) {
            if (i > 0) phrase += ' ';
            phrase += uni::encode_utf8(t.text);
          }
        }
        if (!ok) continue;
        const auto row = st.phrase_table.find(phrase);
        if (row == st.phrase_table.end() || row->second.empty()) continue;
        candidates.push_back({std::move(span), &row->second, std::move(phrase)});
        break;  // longest match wins; shorter ones at `pos` are shadowed
      }
    }

    const double q_word =
        gen_detail::boosted(st.p_word, factor, totals.words, candidates.size());
    // Apply right to left: replacements may insert tokens, which would shift
    // the recorded positions of candidates further to the right.
    for (auto it = candidates.rbegin(); q_word > 0.0 && it != candidates.rend(); ++it) {
      if (!rng.bernoulli(q_word)) continue;
      // overlapping matches: an earlier (right-side) application may have
      // claimed part of this span already
      bool free = true;
      for (std::size_t i : it->span) {
        free = free && !ws.tokens[i].claimed && !ws.tokens[i].deleted;
      }
      if (!free) continue;

      const std::string repl = sample_key(*it->row, rng);
      if (repl == it->phrase) continue;
      std::vector<std::u32string> repl_tokens;
      if (!repl.empty()) {
        for (const std::string& tok : detail::split_space_tokens(repl)) {
          repl_tokens.push_back(uni::nfc(uni::decode_utf8(tok)));
        }
      }
      const std::size_t len = it->span.size();
      const int group = ws.new_group(AspectKind::common_other);
      const std::size_t shared = std::min(len, repl_tokens.size());
      for (std::size_t i = 0; i < len; ++i) {
        WorkingToken& t = ws.tokens[it->span[i]];
        if (i < shared) {
          t.text = repl_tokens[i];
        } else {
          t.deleted = true;
        }
        ws.claim(t, group);
      }
      if (repl_tokens.size() > len) {
        const int anchor = ws.tokens[it->span[len - 1]].clean_end;
        std::size_t at = it->span[len - 1] + 1;
        for (std::size_t i = len; i < repl_tokens.size(); ++i) {
          ws.tokens.insert(ws.tokens.begin() + at,
                           gen_detail::make_inserted(repl_tokens[i], anchor, group));
          ++at;
        }
      }
    }
  }

  // Phrase insertions per anchored gap.
  if (st.insert_phrases.empty()) return;
  const auto gaps = gen_detail::anchored_gaps(ws);
  const double q_gap = gen_detail::boosted(st.p_gap, factor, totals.gaps, gaps.size());
  if (q_gap <= 0.0) return;
  std::size_t inserted = 0;
  for (const auto& gap : gaps) {
    if (!rng.bernoulli(q_gap)) continue;
    const std::string phrase = sample_key(st.insert_phrases, rng);
    const auto toks = detail::split_space_tokens(phrase);
    if (toks.empty()) continue;
    const int group = ws.new_group(AspectKind::common_other);
    for (std::size_t i = 0; i < toks.size(); ++i) {
      ws.tokens.insert(
          ws.tokens.begin() + gap.vec_pos + inserted,
          gen_detail::make_inserted(uni::nfc(uni::decode_utf8(toks[i])), gap.anchor, group));
      ++inserted;
    }
  }
}

// ---- dispatch ---------------------------------------------------------------

inline void generate_aspect(AspectKind kind, WorkingSentence& ws, const GenerationContext& ctx) {
  if (!ctx.stats.has(kind)) throw AspectUnavailableError(kind);
  const UnitTotals totals = count_units(ws.clean);
  switch (kind) {
    case AspectKind::diacritics:
      generate_diacritics(ws, *ctx.stats.diacritics, totals, ctx.factor, ctx.rng);
      break;
    case AspectKind::casing:
      generate_casing(ws, *ctx.stats.casing, totals, ctx.factor, ctx.rng);
      break;
    case AspectKind::spelling:
      generate_spelling(ws, *ctx.stats.spelling, ctx, totals, ctx.rng);
      break;
    case AspectKind::affix:
      generate_affix(ws, *ctx.stats.affix, ctx, totals, ctx.rng);
      break;
    case AspectKind::punctuation:
      generate_punctuation(ws, *ctx.stats.punctuation, totals, ctx.factor, ctx.rng);
      break;
    case AspectKind::whitespace:
      generate_whitespace(ws, *ctx.stats.whitespace, totals, ctx.factor, ctx.rng);
      break;
    case AspectKind::word_order:
      generate_word_order(ws, *ctx.stats.word_order, ctx, ctx.rng);
      break;
    case AspectKind::common_other:
      generate_common_other(ws, *ctx.stats.common_other, totals, ctx.factor, ctx.rng);
      break;
  }
}

// Apply a single aspect to a token sequence with its statistics taken at face
// value (no per-sentence rate rescale). Throws AspectUnavailableError when
// the statistics block lacks the aspect.
inline std::vector<std::string> apply_aspect(AspectKind kind,
                                             const std::vector<std::string>& tokens,
                                             const AspectStatsSet& stats, Rng& rng) {
  WorkingSentence ws = make_working(tokens);
  const LexiconIndex index = LexiconIndex::build(stats.lexicon);
  const GenerationContext ctx{stats, index, 1.0, rng};
  generate_aspect(kind, ws, ctx);
  return visible_utf8(ws);
}

}  // namespace textnoise
