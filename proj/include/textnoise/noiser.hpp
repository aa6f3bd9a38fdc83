#pragma once

// The generation engine: sample a per-sentence edit rate from the profile's
// error-amount distribution, apply the selected aspects in canonical order,
// and optionally emit gold edits (corrections mapping the noised tokens back
// to the clean ones, M2-compatible).

#include <cstdint>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "textnoise/generate.hpp"
#include "textnoise/m2.hpp"
#include "textnoise/profile.hpp"
#include "textnoise/rng.hpp"

namespace textnoise {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct NoiseConfig {
  // Target overall error level; absent means "corpus" (use the profile as-is).
  std::optional<double> target_rate;
  // Aspect selection: a cumulative level k means kinds 1..k (absent aspects
  // silently skipped); an explicit set requires each member to be present in
  // the profile. With neither set, all eight kinds are selected cumulatively.
  std::optional<int> cumulative_level;
  std::vector<AspectKind> aspects;
  // Narrows a default selection to kinds 1-4; an explicit selection that
  // includes a later kind is a ConfigError instead.
  bool preserve_tokenization = false;
  std::uint64_t seed = 0;
  bool emit_m2 = false;
};

struct NoisedSentence {
  std::vector<std::string> tokens;
  std::vector<Edit> gold_edits;  // over `tokens`; applying them restores clean
  double sampled_rate = 0.0;
};

// Draw a per-sentence token-edit rate: Normal(mean, std) truncated to [0,1]
// by resampling (at most 100 attempts, then the last draw is clamped).
// std == 0 returns the mean exactly.
inline double sample_sentence_rate(const ErrorAmount& ea, Rng& rng) {
  if (ea.std <= 0.0) return ea.mean < 0.0 ? 0.0 : (ea.mean > 1.0 ? 1.0 : ea.mean);
  double r = 0.0;
  for (int attempt = 0; attempt < 100; ++attempt) {
    r = rng.normal(ea.mean, ea.std);
    if (r >= 0.0 && r <= 1.0) return r;
  }
  return r < 0.0 ? 0.0 : (r > 1.0 ? 1.0 : r);
}

namespace noise_detail {

inline std::vector<AspectKind> resolve_selection(const NoiseConfig& config,
                                                 const AspectStatsSet& stats) {
  std::vector<AspectKind> selected;
  if (config.cumulative_level) {
    const int k = *config.cumulative_level;
    if (k < 1 || k > 8) {
      throw ConfigError("cumulative aspect level must lie in 1..8");
    }
    for (AspectKind a : cumulative_aspects(k)) {
      if (stats.has(a)) selected.push_back(a);  // absent => silently skipped
    }
  } else if (!config.aspects.empty()) {
    for (AspectKind a : kAspectOrder) {
      bool wanted = false;
      for (AspectKind b : config.aspects) wanted = wanted || b == a;
      if (!wanted) continue;
      if (!stats.has(a)) throw AspectUnavailableError(a);
      selected.push_back(a);
    }
  } else {
    // Nothing was requested explicitly, so preserve_tokenization narrows the
    // default selection instead of conflicting with it.
    for (AspectKind a : kAspectOrder) {
      if (!stats.has(a)) continue;
      if (config.preserve_tokenization && !preserves_tokenization(a)) continue;
      selected.push_back(a);
    }
    return selected;
  }
  if (config.preserve_tokenization) {
    for (AspectKind a : selected) {
      if (!preserves_tokenization(a)) {
        throw ConfigError(std::string("preserve-tokenization excludes aspect \"") +
                          std::string(aspect_name(a)) + "\"; select aspects 1-4 only");
      }
    }
  }
  return selected;
}

// Convert the working sentence's edit groups into corrections over the noised
// tokens: each group's visible positions give the noisy span, its clean-token
// span gives the replacement. Fully deleted groups become insertions at the
// position the tokens would occupy; same-position insertions merge in clean
// order.
inline std::vector<Edit> extract_gold_edits(const WorkingSentence& ws) {
  struct Span {
    int vis_lo = std::numeric_limits<int>::max();
    int vis_hi = -1;
    int clean_lo = std::numeric_limits<int>::max();
    int clean_hi = -1;
    int insert_at = -1;
  };
  std::map<int, Span> spans;
  int vis = 0;
  for (const WorkingToken& t : ws.tokens) {
    const int pos = vis;
    if (!t.deleted) ++vis;
    if (t.group < 0) continue;
    Span& s = spans[t.group];
    if (!t.deleted) {
      s.vis_lo = std::min(s.vis_lo, pos);
      s.vis_hi = std::max(s.vis_hi, pos + 1);
    } else if (s.insert_at < 0) {
      s.insert_at = pos;
    }
    s.clean_lo = std::min(s.clean_lo, t.clean_begin);
    s.clean_hi = std::max(s.clean_hi, t.clean_end);
  }

  std::vector<std::tuple<int, int, int, Edit>> keyed;  // (start, end, clean_lo, edit)
  for (const auto& [group, s] : spans) {
    Edit e;
    if (s.vis_hi >= 0) {
      e.start = s.vis_lo;
      e.end = s.vis_hi;
    } else {
      e.start = s.insert_at;
      e.end = s.insert_at;
    }
    for (int i = s.clean_lo; i < s.clean_hi; ++i) {
      e.replacement.push_back(uni::encode_utf8(ws.clean[static_cast<std::size_t>(i)]));
    }
    e.error_type = std::string(aspect_name(ws.group_kinds[static_cast<std::size_t>(group)]));
    keyed.emplace_back(e.start, e.end, s.clean_lo, std::move(e));
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a), std::get<2>(a)) <
           std::tie(std::get<0>(b), std::get<1>(b), std::get<2>(b));
  });

  std::vector<Edit> out;
  for (auto& [start, end, clean_lo, e] : keyed) {
    if (!out.empty()) {
      Edit& prev = out.back();
      if (prev.is_insertion() && e.is_insertion() && prev.start == e.start) {
        prev.replacement.insert(prev.replacement.end(), e.replacement.begin(),
                                e.replacement.end());
        continue;
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace noise_detail

class Noiser {
 public:
  Noiser(const Profile& profile, NoiseConfig config)
      : config_(std::move(config)),
        profile_(config_.target_rate ? scale_profile(profile, *config_.target_rate)
                                     : profile),
        selection_(noise_detail::resolve_selection(config_, profile_.stats)),
        lexicon_index_(LexiconIndex::build(profile_.stats.lexicon)) {}

  const Profile& profile() const { return profile_; }
  const NoiseConfig& config() const { return config_; }
  const std::vector<AspectKind>& selection() const { return selection_; }

  NoisedSentence noise_sentence(const std::vector<std::string>& clean_tokens,
                                std::uint64_t sentence_index) const {
    NoisedSentence out;
    Rng rng(derive_seed(config_.seed, sentence_index));
    const double rate = sample_sentence_rate(profile_.error_amount, rng);
    out.sampled_rate = rate;
    const double mean = profile_.error_amount.mean;
    if (clean_tokens.empty() || selection_.empty() || rate <= 0.0 || mean <= 0.0) {
      out.tokens = clean_tokens;
      return out;
    }
    WorkingSentence ws = make_working(clean_tokens);
    const GenerationContext ctx{profile_.stats, lexicon_index_, rate / mean, rng};
    for (AspectKind kind : selection_) generate_aspect(kind, ws, ctx);
    out.tokens = visible_utf8(ws);
    if (config_.emit_m2) out.gold_edits = noise_detail::extract_gold_edits(ws);
    return out;
  }

 private:
  NoiseConfig config_;
  Profile profile_;  // scaled to the target when one was given
  std::vector<AspectKind> selection_;
  LexiconIndex lexicon_index_;
};

inline NoisedSentence noise_sentence(const std::vector<std::string>& clean_tokens,
                                     const Profile& profile, const NoiseConfig& config,
                                     std::uint64_t sentence_index) {
  return Noiser(profile, config).noise_sentence(clean_tokens, sentence_index);
}

inline std::vector<NoisedSentence> noise_corpus(
    const std::vector<std::vector<std::string>>& sentences, const Profile& profile,
    const NoiseConfig& config) {
  const Noiser noiser(profile, config);
  std::vector<NoisedSentence> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    out.push_back(noiser.noise_sentence(sentences[i], i));
  }
  return out;
}

// An emitted sentence as an annotation block: noised tokens plus the
// corrections that restore the clean ones.
inline M2Sentence to_m2_sentence(const NoisedSentence& s) {
  M2Sentence m2;
  m2.source_tokens = s.tokens;
  m2.edits = s.gold_edits;
  return m2;
}

// Join tokens into plain text: single spaces, none before .,;:?! or closing
// brackets, none after opening brackets.
inline std::string detokenize(const std::vector<std::string>& tokens) {
  auto attaches_left = [](const std::string& t) {
    if (t.empty()) return false;
    const char c = t[0];
    return c == '.' || c == ',' || c == ';' || c == ':' || c == '?' || c == '!' ||
           c == ')' || c == ']' || c == '}';
  };
  auto attaches_right = [](const std::string& t) {
    if (t.empty()) return false;
    const char c = t.back();
    return c == '(' || c == '[' || c == '{';
  };
  std::string out;
  bool suppress_space = true;
  for (const std::string& t : tokens) {
    if (!suppress_space && !attaches_left(t)) out += ' ';
    out += t;
    suppress_space = attaches_right(t);
  }
  return out;
}

// ---- streaming corpus interface -------------------------------------------

struct NoiseStreamOptions {
  int threads = 1;       // worker count; output bytes are identical for any value
  bool detokenize = false;
  std::ostream* m2_out = nullptr;  // sidecar annotation stream when emitting M2
};

// Noise `in` line by line onto `out` (one sentence per line, tokens separated
// by single spaces). Deterministic for a fixed (profile, config, input)
// regardless of thread count; errors carry the 1-based line number. Returns
// the number of lines processed.
inline std::size_t noise_stream(std::istream& in, std::ostream& out, const Noiser& noiser,
                                const NoiseStreamOptions& options = {}) {
  const int threads = options.threads < 1 ? 1 : options.threads;
  const std::size_t batch_size = static_cast<std::size_t>(threads) * 64;
  std::vector<std::string> lines;
  lines.reserve(batch_size);
  std::size_t base_index = 0;

  auto emit = [&](const NoisedSentence& s) {
    if (options.detokenize) {
      out << detokenize(s.tokens) << '\n';
    } else {
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        if (i > 0) out << ' ';
        out << s.tokens[i];
      }
      out << '\n';
    }
    if (options.m2_out) *options.m2_out << serialize_m2(to_m2_sentence(s));
  };

  auto process_batch = [&]() {
    std::vector<NoisedSentence> results(lines.size());
    std::vector<std::exception_ptr> errors(lines.size());
    auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        try {
          results[i] =
              noiser.noise_sentence(detail::split_space_tokens(lines[i]), base_index + i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    if (threads == 1 || lines.size() < 2) {
      work(0, lines.size());
    } else {
      std::vector<std::thread> pool;
      const std::size_t per = (lines.size() + static_cast<std::size_t>(threads) - 1) /
                              static_cast<std::size_t>(threads);
      for (int t = 0; t < threads; ++t) {
        const std::size_t begin = static_cast<std::size_t>(t) * per;
        const std::size_t end = std::min(lines.size(), begin + per);
        if (begin >= end) break;
        pool.emplace_back(work, begin, end);
      }
      for (std::thread& t : pool) t.join();
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (errors[i]) {
        try {
          std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
          throw std::runtime_error("line " + std::to_string(base_index + i + 1) + ": " +
                                   e.what());
        }
      }
      emit(results[i]);
    }
    base_index += lines.size();
    lines.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
    if (lines.size() >= batch_size) process_batch();
  }
  process_batch();
  return base_index;
}

}  // namespace textnoise
