#pragma once

// Error profiles: per-aspect statistics estimated from an annotated corpus,
// an overall error amount, and JSON (de)serialization with strict validation.
//
// Direction convention: annotation files carry corrections (noisy source +
// edits that fix it). Estimation first inverts each annotator's corrections
// into error-introducing edits over the corrected (clean) tokens, then
// classifies those and accumulates per-aspect unit counts, so the resulting
// probabilities are "errors per opportunity" in the clean -> noisy direction
// the generator uses.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "textnoise/aspects.hpp"
#include "textnoise/generate.hpp"
#include "textnoise/m2.hpp"
#include "textnoise/unicode.hpp"

namespace textnoise {

enum class ProfileRole { development, test };

inline std::string_view role_name(ProfileRole r) {
  return r == ProfileRole::development ? "development" : "test";
}

inline std::optional<ProfileRole> role_from_name(std::string_view name) {
  if (name == "development") return ProfileRole::development;
  if (name == "test") return ProfileRole::test;
  return std::nullopt;
}

struct ErrorAmount {
  double mean = 0.0;  // mean per-sentence token-edit rate
  double std = 0.0;   // population standard deviation of the rate
  friend bool operator==(const ErrorAmount&, const ErrorAmount&) = default;
};

struct Profile {
  int schema_version = 1;
  std::string name;
  std::string language;
  ProfileRole role = ProfileRole::development;
  ErrorAmount error_amount;
  AspectStatsSet stats;
  friend bool operator==(const Profile&, const Profile&) = default;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& field, const std::string& why)
      : std::runtime_error("invalid profile: " + field + ": " + why), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// The profile's overall noise level: expected token-edit rate per sentence.
inline double corpus_error_level(const Profile& p) { return p.error_amount.mean; }

// ---- estimation -----------------------------------------------------------

namespace est_detail {

// Token-edit rate of one (clean sentence, error edits) pair: edited clean
// tokens (insertions count 1) over clean length, capped at 1.
inline double token_edit_rate(std::size_t clean_len, const std::vector<Edit>& noise) {
  std::size_t cost = 0;
  for (const Edit& e : noise) {
    cost += std::max<std::size_t>(static_cast<std::size_t>(e.end - e.start), 1);
  }
  const double rate =
      static_cast<double>(cost) / static_cast<double>(std::max<std::size_t>(clean_len, 1));
  return rate > 1.0 ? 1.0 : rate;
}

inline ProbMap normalized(const std::map<std::string, double>& counts) {
  double total = 0.0;
  for (const auto& [k, v] : counts) total += v;
  ProbMap out;
  if (!(total > 0.0)) return out;
  for (const auto& [k, v] : counts) out[k] = v / total;
  return out;
}

inline PairTable normalized_joint(const std::map<std::string, std::map<std::string, double>>& counts) {
  double total = 0.0;
  for (const auto& [k, row] : counts) {
    for (const auto& [k2, v] : row) total += v;
  }
  PairTable out;
  if (!(total > 0.0)) return out;
  for (const auto& [k, row] : counts) {
    for (const auto& [k2, v] : row) out[k][k2] = v / total;
  }
  return out;
}

inline double ratio01(std::size_t num, std::size_t den) {
  if (den == 0) return num == 0 ? 0.0 : 1.0;
  const double r = static_cast<double>(num) / static_cast<double>(den);
  return r > 1.0 ? 1.0 : r;
}

struct Accumulator {
  std::vector<double> rates;
  UnitTotals units;  // summed over all samples

  // diacritics
  std::size_t dia_sentences = 0;    // samples containing a marked character
  std::size_t dia_full = 0;         // samples where every mark was stripped
  std::size_t dia_char_events = 0;  // stripped/added characters elsewhere
  std::size_t dia_chars_partial = 0;  // marked characters in non-full samples

  // casing
  std::size_t case_first = 0;
  std::size_t case_other = 0;

  // spelling
  std::size_t sp_events = 0;
  std::map<std::string, double> sp_ops;
  std::map<std::string, double> sp_insert_chars;
  std::map<std::string, std::map<std::string, double>> sp_replace;

  // affix
  std::size_t af_events = 0;
  std::size_t af_suffix = 0;
  std::map<std::string, std::map<std::string, double>> af_suffix_tab;
  std::map<std::string, std::map<std::string, double>> af_prefix_tab;

  // punctuation
  std::size_t pu_ins = 0;
  std::size_t pu_rem = 0;
  std::size_t pu_rep = 0;
  std::map<std::string, double> pu_insert_tokens;
  std::map<std::string, std::map<std::string, double>> pu_replace;

  // whitespace
  std::size_t ws_joins = 0;
  std::size_t ws_splits = 0;

  // word order
  std::size_t wo_events = 0;
  std::map<std::string, double> wo_windows;

  // common word/phrase substitutions
  std::size_t co_word_events = 0;
  std::size_t co_gap_events = 0;
  std::map<std::string, std::map<std::string, double>> co_phrases;
  std::map<std::string, double> co_inserts;
};

inline void add_units(UnitTotals& into, const UnitTotals& u) {
  into.words += u.words;
  into.alpha_words += u.alpha_words;
  into.cased_first += u.cased_first;
  into.nonfirst_cased += u.nonfirst_cased;
  into.dia_chars += u.dia_chars;
  into.punct_tokens += u.punct_tokens;
  into.splittable += u.splittable;
  into.gaps += u.gaps;
  into.internal_gaps += u.internal_gaps;
}

inline void accumulate_sample(Accumulator& acc, const std::vector<std::string>& clean,
                              const std::vector<Edit>& noise_all, const Lexicon& lexicon) {
  // Identity edits carry no error signal; drop them up front.
  std::vector<Edit> noise;
  noise.reserve(noise_all.size());
  for (const Edit& e : noise_all) {
    bool identity = static_cast<int>(e.replacement.size()) == e.end - e.start;
    for (int i = e.start; identity && i < e.end; ++i) {
      identity = e.replacement[static_cast<std::size_t>(i - e.start)] ==
                 clean[static_cast<std::size_t>(i)];
    }
    if (!identity) noise.push_back(e);
  }

  const std::vector<std::u32string> clean_u32 = detail::decode_nfc_tokens(clean);
  const UnitTotals u = count_units(clean_u32);
  add_units(acc.units, u);
  acc.rates.push_back(token_edit_rate(clean.size(), noise));

  std::size_t dia_stripped = 0;
  std::size_t dia_added = 0;

  for (const Edit& e : noise) {
    const ClassifiedEdit ce = classify_edit(clean, e, lexicon);
    switch (ce.kind) {
      case AspectKind::diacritics: {
        const auto& d = std::get<DiacriticsDetail>(ce.detail);
        dia_stripped += static_cast<std::size_t>(d.stripped);
        dia_added += static_cast<std::size_t>(d.added);
        break;
      }
      case AspectKind::casing: {
        const auto& d = std::get<CasingDetail>(ce.detail);
        acc.case_first += static_cast<std::size_t>(d.first_flips);
        acc.case_other += static_cast<std::size_t>(d.other_flips);
        break;
      }
      case AspectKind::spelling: {
        const auto& d = std::get<SpellingDetail>(ce.detail);
        ++acc.sp_events;
        for (const CharOp& op : d.ops) {
          acc.sp_ops[std::string(char_op_name(op.kind))] += 1.0;
          if (op.kind == CharOpKind::insert_char) {
            acc.sp_insert_chars[uni::encode_utf8(std::u32string(1, op.to))] += 1.0;
          } else if (op.kind == CharOpKind::replace_char) {
            acc.sp_replace[uni::encode_utf8(std::u32string(1, op.from))]
                          [uni::encode_utf8(std::u32string(1, op.to))] += 1.0;
          }
        }
        break;
      }
      case AspectKind::affix: {
        const auto& d = std::get<AffixDetail>(ce.detail);
        ++acc.af_events;
        if (d.is_suffix) {
          ++acc.af_suffix;
          acc.af_suffix_tab[d.clean_affix][d.noisy_affix] += 1.0;
        } else {
          acc.af_prefix_tab[d.clean_affix][d.noisy_affix] += 1.0;
        }
        break;
      }
      case AspectKind::punctuation: {
        const auto& d = std::get<PunctuationDetail>(ce.detail);
        acc.pu_ins += d.inserted.size();
        for (const std::string& t : d.inserted) acc.pu_insert_tokens[t] += 1.0;
        acc.pu_rem += d.removed.size();
        acc.pu_rep += d.replaced.size();
        for (const auto& [from, to] : d.replaced) acc.pu_replace[from][to] += 1.0;
        break;
      }
      case AspectKind::whitespace: {
        const auto& d = std::get<WhitespaceDetail>(ce.detail);
        acc.ws_joins += static_cast<std::size_t>(d.joins);
        acc.ws_splits += static_cast<std::size_t>(d.splits);
        break;
      }
      case AspectKind::word_order: {
        const auto& d = std::get<WordOrderDetail>(ce.detail);
        ++acc.wo_events;
        acc.wo_windows[std::to_string(d.window)] += 1.0;
        break;
      }
      case AspectKind::common_other: {
        const auto& d = std::get<CommonOtherDetail>(ce.detail);
        if (e.start == e.end) {
          ++acc.co_gap_events;
          if (d.mined) acc.co_inserts[d.noisy_phrase] += 1.0;
        } else {
          ++acc.co_word_events;
          if (d.mined) acc.co_phrases[d.clean_phrase][d.noisy_phrase] += 1.0;
        }
        break;
      }
    }
  }

  if (u.dia_chars > 0) {
    ++acc.dia_sentences;
    if (u.dia_chars >= 2 && dia_stripped == u.dia_chars) {
      ++acc.dia_full;
    } else {
      acc.dia_char_events += dia_stripped + dia_added;
      acc.dia_chars_partial += u.dia_chars;
    }
  }
}

}  // namespace est_detail

struct EstimateOptions {
  int annotator = 0;  // which annotator's corrections to learn from
  std::string name = "estimated";
  std::string language = "und";
  ProfileRole role = ProfileRole::development;
  Lexicon extra_lexicon;  // merged with the corpus lexicon before classifying
};

inline Profile estimate_profile(const std::vector<M2Sentence>& corpus,
                                const EstimateOptions& options = {}) {
  // Pass 1: corrected tokens per (sentence, annotator) sample, plus the
  // lexicon and alphabet the classifiers need.
  struct Sample {
    std::vector<std::string> clean;
    std::vector<Edit> noise;
  };
  std::vector<Sample> samples;
  Lexicon lexicon = options.extra_lexicon;
  std::set<char32_t> alphabet;
  for (const M2Sentence& sent : corpus) {
    // The alphabet covers the noisy side too: replacement tables may emit
    // characters that never occur in corrected text.
    for (const std::string& tok : sent.source_tokens) {
      for (char32_t c : uni::nfc(uni::decode_utf8(tok))) {
        if (uni::is_letter(c)) alphabet.insert(c);
      }
    }
    auto [clean, noise] = invert_edits(sent, options.annotator);
    for (const std::string& tok : clean) {
      const std::u32string u = uni::nfc(uni::decode_utf8(tok));
      bool has_letter = false;
      for (char32_t c : u) {
        if (uni::is_letter(c)) {
          alphabet.insert(c);
          has_letter = true;
        }
      }
      if (has_letter) ++lexicon[uni::encode_utf8(u)];
    }
    samples.push_back({std::move(clean), std::move(noise)});
  }
  if (samples.empty()) {
    throw ValidationError("corpus", "no sentences to estimate from");
  }

  // Pass 2: classify the inverted edits and accumulate unit counts.
  est_detail::Accumulator acc;
  for (const Sample& s : samples) {
    est_detail::accumulate_sample(acc, s.clean, s.noise, lexicon);
  }

  Profile p;
  p.name = options.name;
  p.language = options.language;
  p.role = options.role;

  const double n = static_cast<double>(acc.rates.size());
  double mean = 0.0;
  for (double r : acc.rates) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : acc.rates) var += (r - mean) * (r - mean);
  p.error_amount.mean = mean;
  p.error_amount.std = std::sqrt(var / n);

  using est_detail::ratio01;
  if (acc.dia_full + acc.dia_char_events > 0) {
    DiacriticsStats st;
    st.p_sentence = ratio01(acc.dia_full, acc.dia_sentences);
    st.p_char = ratio01(acc.dia_char_events, acc.dia_chars_partial);
    p.stats.diacritics = st;
  }
  if (acc.case_first + acc.case_other > 0) {
    CasingStats st;
    st.p_first = ratio01(acc.case_first, acc.units.cased_first);
    st.p_other = ratio01(acc.case_other, acc.units.nonfirst_cased);
    p.stats.casing = st;
  }
  if (acc.sp_events > 0) {
    SpellingStats st;
    st.p_word = ratio01(acc.sp_events, acc.units.alpha_words);
    st.ops = est_detail::normalized(acc.sp_ops);
    st.insert_chars = est_detail::normalized(acc.sp_insert_chars);
    st.replace_pairs = est_detail::normalized_joint(acc.sp_replace);
    p.stats.spelling = st;
  }
  if (acc.af_events > 0) {
    AffixStats st;
    st.p_word = ratio01(acc.af_events, acc.units.alpha_words);
    st.p_suffix = ratio01(acc.af_suffix, acc.af_events);
    st.suffix_table = est_detail::normalized_joint(acc.af_suffix_tab);
    st.prefix_table = est_detail::normalized_joint(acc.af_prefix_tab);
    p.stats.affix = st;
  }
  if (acc.pu_ins + acc.pu_rem + acc.pu_rep > 0) {
    PunctuationStats st;
    st.p_insert = ratio01(acc.pu_ins, acc.units.gaps);
    st.p_remove = ratio01(acc.pu_rem, acc.units.punct_tokens);
    st.p_replace = ratio01(acc.pu_rep, acc.units.punct_tokens);
    st.insert_tokens = est_detail::normalized(acc.pu_insert_tokens);
    st.replace_pairs = est_detail::normalized_joint(acc.pu_replace);
    p.stats.punctuation = st;
  }
  if (acc.ws_joins + acc.ws_splits > 0) {
    WhitespaceStats st;
    st.p_join = ratio01(acc.ws_joins, acc.units.internal_gaps);
    st.p_split = ratio01(acc.ws_splits, acc.units.splittable);
    p.stats.whitespace = st;
  }
  if (acc.wo_events > 0) {
    WordOrderStats st;
    st.p_sentence = ratio01(acc.wo_events, acc.rates.size());
    st.window_sizes = est_detail::normalized(acc.wo_windows);
    p.stats.word_order = st;
  }
  if (acc.co_word_events + acc.co_gap_events > 0) {
    CommonOtherStats st;
    st.p_word = ratio01(acc.co_word_events, acc.units.words);
    st.p_gap = ratio01(acc.co_gap_events, acc.units.gaps);
    st.phrase_table = est_detail::normalized_joint(acc.co_phrases);
    st.insert_phrases = est_detail::normalized(acc.co_inserts);
    p.stats.common_other = st;
  }

  p.stats.lexicon = std::move(lexicon);
  p.stats.alphabet.assign(alphabet.begin(), alphabet.end());
  return p;
}

// ---- scaling ----------------------------------------------------------------

// Rescale a profile to a target overall error level. Trigger probabilities are
// multiplied by target / current level and clamped to 1 (setting the aspect's
// `saturated` flag); internal choice distributions are left untouched. The
// scaled mean is assigned the target exactly.
inline Profile scale_profile(const Profile& p, double target) {
  if (!(target >= 0.0 && target <= 1.0)) {
    throw ValidationError("target", "target level must lie in [0, 1]");
  }
  const double level = p.error_amount.mean;
  if (!(level > 0.0) && target > 0.0) {
    throw ValidationError("error_amount.mean", "unscalable: profile level is zero");
  }
  const double factor = target == 0.0 ? 0.0 : target / level;
  Profile out = p;
  out.error_amount.mean = target;
  out.error_amount.std = p.error_amount.std * factor;
  const auto scale1 = [&](double& v, bool& sat) {
    v *= factor;
    if (v > 1.0) {
      v = 1.0;
      sat = true;
    }
  };
  if (out.stats.diacritics) {
    auto& a = *out.stats.diacritics;
    scale1(a.p_sentence, a.saturated);
    scale1(a.p_char, a.saturated);
  }
  if (out.stats.casing) {
    auto& a = *out.stats.casing;
    scale1(a.p_first, a.saturated);
    scale1(a.p_other, a.saturated);
  }
  if (out.stats.spelling) {
    auto& a = *out.stats.spelling;
    scale1(a.p_word, a.saturated);
  }
  if (out.stats.affix) {
    auto& a = *out.stats.affix;
    scale1(a.p_word, a.saturated);
  }
  if (out.stats.punctuation) {
    auto& a = *out.stats.punctuation;
    scale1(a.p_insert, a.saturated);
    scale1(a.p_remove, a.saturated);
    scale1(a.p_replace, a.saturated);
  }
  if (out.stats.whitespace) {
    auto& a = *out.stats.whitespace;
    scale1(a.p_join, a.saturated);
    scale1(a.p_split, a.saturated);
  }
  if (out.stats.word_order) {
    auto& a = *out.stats.word_order;
    scale1(a.p_sentence, a.saturated);
  }
  if (out.stats.common_other) {
    auto& a = *out.stats.common_other;
    scale1(a.p_word, a.saturated);
    scale1(a.p_gap, a.saturated);
  }
  return out;
}

// ---- JSON ---------------------------------------------------------------------

namespace json_detail {

using nlohmann::json;

inline json prob_json(double v) { return json(v); }

inline void put_common(json& j, bool saturated) {
  j["saturated"] = saturated;
}

inline json aspects_json(const AspectStatsSet& s) {
  json out = json::object();
  if (s.diacritics) {
    json a;
    a["p_sentence"] = s.diacritics->p_sentence;
    a["p_char"] = s.diacritics->p_char;
    put_common(a, s.diacritics->saturated);
    out["diacritics"] = std::move(a);
  }
  if (s.casing) {
    json a;
    a["p_first"] = s.casing->p_first;
    a["p_other"] = s.casing->p_other;
    put_common(a, s.casing->saturated);
    out["casing"] = std::move(a);
  }
  if (s.spelling) {
    json a;
    a["p_word"] = s.spelling->p_word;
    a["ops"] = s.spelling->ops;
    a["insert_chars"] = s.spelling->insert_chars;
    a["replace_pairs"] = s.spelling->replace_pairs;
    put_common(a, s.spelling->saturated);
    out["spelling"] = std::move(a);
  }
  if (s.affix) {
    json a;
    a["p_word"] = s.affix->p_word;
    a["p_suffix"] = s.affix->p_suffix;
    a["suffix_table"] = s.affix->suffix_table;
    a["prefix_table"] = s.affix->prefix_table;
    put_common(a, s.affix->saturated);
    out["affix"] = std::move(a);
  }
  if (s.punctuation) {
    json a;
    a["p_insert"] = s.punctuation->p_insert;
    a["p_remove"] = s.punctuation->p_remove;
    a["p_replace"] = s.punctuation->p_replace;
    a["insert_tokens"] = s.punctuation->insert_tokens;
    a["replace_pairs"] = s.punctuation->replace_pairs;
    put_common(a, s.punctuation->saturated);
    out["punctuation"] = std::move(a);
  }
  if (s.whitespace) {
    json a;
    a["p_join"] = s.whitespace->p_join;
    a["p_split"] = s.whitespace->p_split;
    put_common(a, s.whitespace->saturated);
    out["whitespace"] = std::move(a);
  }
  if (s.word_order) {
    json a;
    a["p_sentence"] = s.word_order->p_sentence;
    a["window_sizes"] = s.word_order->window_sizes;
    put_common(a, s.word_order->saturated);
    out["word_order"] = std::move(a);
  }
  if (s.common_other) {
    json a;
    a["p_word"] = s.common_other->p_word;
    a["p_gap"] = s.common_other->p_gap;
    a["phrase_table"] = s.common_other->phrase_table;
    a["insert_phrases"] = s.common_other->insert_phrases;
    put_common(a, s.common_other->saturated);
    out["common_other"] = std::move(a);
  }
  return out;
}

// ---- validation-centric readers --------------------------------------------

// Field access that defers type checking to read_prob (json::value() would
// throw nlohmann's own type_error on a wrongly typed field).
inline json field_or(const json& a, const char* key, double def) {
  return a.contains(key) ? a[key] : json(def);
}

inline double read_prob(const json& j, const std::string& field) {
  if (!j.is_number()) throw ValidationError(field, "must be a number");
  const double v = j.get<double>();
  if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(field, "must lie in [0, 1]");
  return v;
}

inline bool read_saturated(const json& a, const std::string& prefix) {
  if (!a.contains("saturated")) return false;
  if (!a["saturated"].is_boolean()) {
    throw ValidationError(prefix + ".saturated", "must be a boolean");
  }
  return a["saturated"].get<bool>();
}

inline ProbMap read_prob_map(const json& j, const std::string& field) {
  if (!j.is_object()) throw ValidationError(field, "must be an object");
  ProbMap out;
  double total = 0.0;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ValidationError(field + "." + key, "must be a number");
    const double v = value.get<double>();
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError(field + "." + key, "must lie in [0, 1]");
    }
    out[key] = v;
    total += v;
  }
  if (!out.empty() && std::abs(total - 1.0) > 1e-9) {
    throw ValidationError(field, "probabilities must sum to 1");
  }
  return out;
}

inline PairTable read_pair_table(const json& j, const std::string& field) {
  if (!j.is_object()) throw ValidationError(field, "must be an object");
  PairTable out;
  double total = 0.0;
  for (const auto& [key, row] : j.items()) {
    if (!row.is_object()) throw ValidationError(field + "." + key, "must be an object");
    for (const auto& [key2, value] : row.items()) {
      if (!value.is_number()) {
        throw ValidationError(field + "." + key + "." + key2, "must be a number");
      }
      const double v = value.get<double>();
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError(field + "." + key + "." + key2, "must lie in [0, 1]");
      }
      out[key][key2] = v;
      total += v;
    }
  }
  if (!out.empty() && std::abs(total - 1.0) > 1e-9) {
    throw ValidationError(field, "probabilities must sum to 1");
  }
  return out;
}

inline void require_keys(const json& j, const std::string& prefix,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (allowed.count(key) == 0) {
      throw ValidationError(prefix.empty() ? key : prefix + "." + key, "unknown field");
    }
  }
}

}  // namespace json_detail

inline nlohmann::json profile_to_json(const Profile& p) {
  nlohmann::json j;
  j["schema_version"] = p.schema_version;
  j["name"] = p.name;
  j["language"] = p.language;
  j["role"] = std::string(role_name(p.role));
  j["error_amount"] = {{"mean", p.error_amount.mean}, {"std", p.error_amount.std}};
  j["aspects"] = json_detail::aspects_json(p.stats);
  j["lexicon"] = p.stats.lexicon;
  j["alphabet"] = uni::encode_utf8(p.stats.alphabet);
  return j;
}

inline Profile profile_from_json(const nlohmann::json& j) {
  using json_detail::field_or;
  using json_detail::read_pair_table;
  using json_detail::read_prob;
  using json_detail::read_prob_map;
  using json_detail::read_saturated;
  using json_detail::require_keys;

  if (!j.is_object()) throw ValidationError("profile", "must be a JSON object");
  require_keys(j, "", {"schema_version", "name", "language", "role", "error_amount",
                       "aspects", "lexicon", "alphabet"});
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw ValidationError("schema_version", "must be an integer");
  }
  Profile p;
  p.schema_version = j["schema_version"].get<int>();
  if (p.schema_version != 1) {
    throw ValidationError("schema_version", "unsupported version");
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ValidationError("name", "must be a string");
    p.name = j["name"].get<std::string>();
  }
  if (j.contains("language")) {
    if (!j["language"].is_string()) throw ValidationError("language", "must be a string");
    p.language = j["language"].get<std::string>();
  }
  if (j.contains("role")) {
    if (!j["role"].is_string()) throw ValidationError("role", "must be a string");
    const auto role = role_from_name(j["role"].get<std::string>());
    if (!role) throw ValidationError("role", "must be \"development\" or \"test\"");
    p.role = *role;
  }
  if (!j.contains("error_amount") || !j["error_amount"].is_object()) {
    throw ValidationError("error_amount", "must be an object");
  }
  {
    const auto& e = j["error_amount"];
    require_keys(e, "error_amount", {"mean", "std"});
    p.error_amount.mean =
        read_prob(e.contains("mean") ? e["mean"] : nlohmann::json(), "error_amount.mean");
    if (!e.contains("std") || !e["std"].is_number()) {
      throw ValidationError("error_amount.std", "must be a number");
    }
    p.error_amount.std = e["std"].get<double>();
    if (!(p.error_amount.std >= 0.0)) {
      throw ValidationError("error_amount.std", "must be non-negative");
    }
  }

  if (j.contains("aspects")) {
    const auto& as = j["aspects"];
    if (!as.is_object()) throw ValidationError("aspects", "must be an object");
    require_keys(as, "aspects",
                 {"diacritics", "casing", "spelling", "affix", "punctuation", "whitespace",
                  "word_order", "common_other"});
    if (as.contains("diacritics")) {
      const auto& a = as["diacritics"];
      require_keys(a, "aspects.diacritics", {"p_sentence", "p_char", "saturated"});
      DiacriticsStats st;
      st.p_sentence = read_prob(field_or(a, "p_sentence", 0.0), "aspects.diacritics.p_sentence");
      st.p_char = read_prob(field_or(a, "p_char", 0.0), "aspects.diacritics.p_char");
      st.saturated = read_saturated(a, "aspects.diacritics");
      p.stats.diacritics = st;
    }
    if (as.contains("casing")) {
      const auto& a = as["casing"];
      require_keys(a, "aspects.casing", {"p_first", "p_other", "saturated"});
      CasingStats st;
      st.p_first = read_prob(field_or(a, "p_first", 0.0), "aspects.casing.p_first");
      st.p_other = read_prob(field_or(a, "p_other", 0.0), "aspects.casing.p_other");
      st.saturated = read_saturated(a, "aspects.casing");
      p.stats.casing = st;
    }
    if (as.contains("spelling")) {
      const auto& a = as["spelling"];
      require_keys(a, "aspects.spelling",
                   {"p_word", "ops", "insert_chars", "replace_pairs", "saturated"});
      SpellingStats st;
      st.p_word = read_prob(field_or(a, "p_word", 0.0), "aspects.spelling.p_word");
      if (a.contains("ops")) st.ops = read_prob_map(a["ops"], "aspects.spelling.ops");
      for (const auto& [op, prob] : st.ops) {
        if (op != kOpInsert && op != kOpRemove && op != kOpReplace && op != kOpSwap &&
            op != kOpConfusion) {
          throw ValidationError("aspects.spelling.ops." + op, "unknown operation");
        }
      }
      if (a.contains("insert_chars")) {
        st.insert_chars = read_prob_map(a["insert_chars"], "aspects.spelling.insert_chars");
      }
      if (a.contains("replace_pairs")) {
        st.replace_pairs =
            read_pair_table(a["replace_pairs"], "aspects.spelling.replace_pairs");
      }
      st.saturated = read_saturated(a, "aspects.spelling");
      p.stats.spelling = st;
    }
    if (as.contains("affix")) {
      const auto& a = as["affix"];
      require_keys(a, "aspects.affix",
                   {"p_word", "p_suffix", "suffix_table", "prefix_table", "saturated"});
      AffixStats st;
      st.p_word = read_prob(field_or(a, "p_word", 0.0), "aspects.affix.p_word");
      st.p_suffix = read_prob(field_or(a, "p_suffix", 1.0), "aspects.affix.p_suffix");
      if (a.contains("suffix_table")) {
        st.suffix_table = read_pair_table(a["suffix_table"], "aspects.affix.suffix_table");
      }
      if (a.contains("prefix_table")) {
        st.prefix_table = read_pair_table(a["prefix_table"], "aspects.affix.prefix_table");
      }
      st.saturated = read_saturated(a, "aspects.affix");
      p.stats.affix = st;
    }
    if (as.contains("punctuation")) {
      const auto& a = as["punctuation"];
      require_keys(a, "aspects.punctuation",
                   {"p_insert", "p_remove", "p_replace", "insert_tokens", "replace_pairs",
                    "saturated"});
      PunctuationStats st;
      st.p_insert = read_prob(field_or(a, "p_insert", 0.0), "aspects.punctuation.p_insert");
      st.p_remove = read_prob(field_or(a, "p_remove", 0.0), "aspects.punctuation.p_remove");
      st.p_replace = read_prob(field_or(a, "p_replace", 0.0), "aspects.punctuation.p_replace");
      if (a.contains("insert_tokens")) {
        st.insert_tokens =
            read_prob_map(a["insert_tokens"], "aspects.punctuation.insert_tokens");
      }
      if (a.contains("replace_pairs")) {
        st.replace_pairs =
            read_pair_table(a["replace_pairs"], "aspects.punctuation.replace_pairs");
      }
      st.saturated = read_saturated(a, "aspects.punctuation");
      p.stats.punctuation = st;
    }
    if (as.contains("whitespace")) {
      const auto& a = as["whitespace"];
      require_keys(a, "aspects.whitespace", {"p_join", "p_split", "saturated"});
      WhitespaceStats st;
      st.p_join = read_prob(field_or(a, "p_join", 0.0), "aspects.whitespace.p_join");
      st.p_split = read_prob(field_or(a, "p_split", 0.0), "aspects.whitespace.p_split");
      st.saturated = read_saturated(a, "aspects.whitespace");
      p.stats.whitespace = st;
    }
    if (as.contains("word_order")) {
      const auto& a = as["word_order"];
      require_keys(a, "aspects.word_order", {"p_sentence", "window_sizes", "saturated"});
      WordOrderStats st;
      st.p_sentence = read_prob(field_or(a, "p_sentence", 0.0), "aspects.word_order.p_sentence");
      if (a.contains("window_sizes")) {
        st.window_sizes = read_prob_map(a["window_sizes"], "aspects.word_order.window_sizes");
      }
      for (const auto& [key, prob] : st.window_sizes) {
        if (key != "2" && key != "3" && key != "4") {
          throw ValidationError("aspects.word_order.window_sizes." + key,
                                "window size must be 2, 3 or 4");
        }
      }
      st.saturated = read_saturated(a, "aspects.word_order");
      p.stats.word_order = st;
    }
    if (as.contains("common_other")) {
      const auto& a = as["common_other"];
      require_keys(a, "aspects.common_other",
                   {"p_word", "p_gap", "phrase_table", "insert_phrases", "saturated"});
      CommonOtherStats st;
      st.p_word = read_prob(field_or(a, "p_word", 0.0), "aspects.common_other.p_word");
      st.p_gap = read_prob(field_or(a, "p_gap", 0.0), "aspects.common_other.p_gap");
      if (a.contains("phrase_table")) {
        st.phrase_table =
            read_pair_table(a["phrase_table"], "aspects.common_other.phrase_table");
      }
      if (a.contains("insert_phrases")) {
        st.insert_phrases =
            read_prob_map(a["insert_phrases"], "aspects.common_other.insert_phrases");
      }
      st.saturated = read_saturated(a, "aspects.common_other");
      p.stats.common_other = st;
    }
  }

  if (j.contains("lexicon")) {
    if (!j["lexicon"].is_object()) throw ValidationError("lexicon", "must be an object");
    for (const auto& [word, count] : j["lexicon"].items()) {
      if (!count.is_number_unsigned() || count.get<std::uint64_t>() == 0) {
        throw ValidationError("lexicon." + word, "count must be a positive integer");
      }
      if (!uni::is_valid_utf8(word)) {
        throw ValidationError("lexicon", "word is not valid UTF-8");
      }
      p.stats.lexicon[word] = count.get<std::uint64_t>();
    }
  }
  if (j.contains("alphabet")) {
    if (!j["alphabet"].is_string()) throw ValidationError("alphabet", "must be a string");
    const std::string a = j["alphabet"].get<std::string>();
    if (!uni::is_valid_utf8(a)) throw ValidationError("alphabet", "must be valid UTF-8");
    p.stats.alphabet = uni::decode_utf8(a);
    for (char32_t c : p.stats.alphabet) {
      if (uni::is_whitespace(c)) {
        throw ValidationError("alphabet", "must not contain whitespace");
      }
    }
  }
  return p;
}

inline std::string save_profile(const Profile& p) { return profile_to_json(p).dump(2) + "\n"; }

inline Profile load_profile(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("profile", std::string("JSON parse failure: ") + e.what());
  }
  return profile_from_json(j);
}

}  // namespace textnoise
