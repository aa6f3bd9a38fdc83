#pragma once

// Hand-built parallel corpus for round-trip checks. Every error event is
// shaped so its recorded edit span equals its token-alignment cost (single
// token rewrites, punctuation drops/extras, two-token joins and adjacent
// reorders), every sentence is twelve tokens long and carries the units each
// error family needs (a capitalised opener, one accented word, two lowercase
// "the" tokens so the phrase channel keeps a fallback target when earlier
// aspects claim one, regular verb forms), and the mined affix/phrase tables
// match in every sentence. A profile estimated from these blocks can
// therefore be replayed onto their own clean sides at any requested rate and
// land close to it, which is what the calibration tests lean on.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "textnoise/textnoise.hpp"

namespace testcorpus {

struct Event {
  enum Kind {
    retoken,      // one clean token appears as `text` (case flip, accent
                  // strip, character swap, affix change, word substitution)
    drop_token,   // the clean token at `pos` is missing
    extra_token,  // a spurious `text` token appears before clean `pos`
    join_next,    // clean tokens pos and pos+1 are fused into one
    swap_next,    // clean tokens pos and pos+1 appear in reverse order
  };
  Kind kind;
  int pos;
  std::string text;     // retoken / extra_token payload
  std::string type;     // error_type recorded on the corrective edit
};

struct BlockSpec {
  std::string clean;          // space-separated clean sentence
  std::vector<Event> events;  // positions strictly increasing, non-overlapping
};

// Turn a clean sentence plus error events into an M2 block: noisy source
// tokens and the corrective edits (indexed over the noisy side) that restore
// the clean sentence.
inline textnoise::M2Sentence build_block(const BlockSpec& spec) {
  std::vector<std::string> clean;
  {
    std::string cur;
    for (char c : spec.clean) {
      if (c == ' ') {
        if (!cur.empty()) clean.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) clean.push_back(std::move(cur));
  }

  textnoise::M2Sentence out;
  std::size_t e = 0;
  auto take_event = [&](std::size_t i) -> const Event* {
    if (e < spec.events.size() && spec.events[e].pos == static_cast<int>(i)) {
      return &spec.events[e++];
    }
    return nullptr;
  };

  for (std::size_t i = 0; i <= clean.size(); ++i) {
    const Event* ev = take_event(i);
    if (ev == nullptr) {
      if (i < clean.size()) out.source_tokens.push_back(clean[i]);
      continue;
    }
    const int j = static_cast<int>(out.source_tokens.size());
    switch (ev->kind) {
      case Event::retoken:
        out.source_tokens.push_back(ev->text);
        out.edits.push_back({j, j + 1, {clean[i]}, ev->type, 0});
        break;
      case Event::drop_token:
        out.edits.push_back({j, j, {clean[i]}, ev->type, 0});
        break;  // noisy side omits the token
      case Event::extra_token:
        out.source_tokens.push_back(ev->text);
        out.edits.push_back({j, j + 1, {}, ev->type, 0});
        if (i < clean.size()) out.source_tokens.push_back(clean[i]);
        break;
      case Event::join_next:
        if (i + 1 >= clean.size()) throw std::logic_error("join_next at sentence end");
        out.source_tokens.push_back(clean[i] + clean[i + 1]);
        out.edits.push_back({j, j + 1, {clean[i], clean[i + 1]}, ev->type, 0});
        ++i;
        break;
      case Event::swap_next:
        if (i + 1 >= clean.size()) throw std::logic_error("swap_next at sentence end");
        out.source_tokens.push_back(clean[i + 1]);
        out.source_tokens.push_back(clean[i]);
        out.edits.push_back({j, j + 2, {clean[i], clean[i + 1]}, ev->type, 0});
        ++i;
        break;
    }
  }
  if (e != spec.events.size()) throw std::logic_error("event position out of range");
  return out;
}

// Twenty-four blocks over twelve sentence templates. Error mix: 8 case
// flips, 8 accent strips, 8 character swaps, 8 affix changes (4 suffix
// ed->ing, 4 re- prefixes), 4 dropped stops, 4 spurious commas, 8 fused
// pairs, 8 reversed pairs, 8 the->a substitutions; 80 edited clean tokens
// over 288 (level 0.2778).
inline std::vector<textnoise::M2Sentence> balanced_corpus() {
  const std::string t1 =
      "The waiter at the café brought the water while guests waited .";
  const std::string t2 =
      "The señor walked across the plaza while the vendors called greetings .";
  const std::string t3 =
      "Every naïve student reviewed the lesson before the class tested again .";
  const std::string t4 =
      "The piñata hung above the children during the warm summer evening .";
  const std::string t5 =
      "That jalapeño sauce burned the visiting cousins during the last night .";
  const std::string t6 =
      "The café owner counted the morning receipts before the customers arrived .";
  const std::string t7 =
      "The señora watched the harbor lights while fishermen unloaded the boats .";
  const std::string t8 =
      "Every naïve tourist visited the museum before the crowds gathered there .";
  const std::string t9 =
      "The piñata maker shaped the paper flowers inside the quiet workshop .";
  const std::string t10 =
      "That old señor repaired the fence while the neighbors offered advice .";
  const std::string t11 =
      "The jalapeño plants needed the water during the long summer drought .";
  const std::string t12 =
      "Some naïve children chased the striped kitten across the sunny garden .";

  using E = Event;
  const std::vector<BlockSpec> blocks = {
      {t1,
       {{E::retoken, 0, "the", "casing"},
        {E::retoken, 3, "a", "other"},
        {E::join_next, 8, "", "whitespace"}}},
      {t1,
       {{E::retoken, 4, "cafe", "diacritics"},
        {E::retoken, 5, "bruoght", "spelling"},
        {E::swap_next, 9, "", "word_order"}}},
      {t2,
       {{E::retoken, 1, "senor", "diacritics"},
        {E::retoken, 9, "calling", "affix"},
        {E::drop_token, 11, "", "punctuation"}}},
      {t2,
       {{E::retoken, 0, "the", "casing"},
        {E::retoken, 4, "a", "other"},
        {E::swap_next, 9, "", "word_order"}}},
      {t3,
       {{E::retoken, 1, "naive", "diacritics"},
        {E::join_next, 6, "", "whitespace"},
        {E::retoken, 9, "retested", "affix"}}},
      {t3,
       {{E::retoken, 2, "stduent", "spelling"}, {E::retoken, 4, "a", "other"}}},
      {t4,
       {{E::retoken, 0, "the", "casing"}, {E::extra_token, 6, ",", "punctuation"}}},
      {t4,
       {{E::retoken, 4, "a", "other"}, {E::swap_next, 8, "", "word_order"}}},
      {t5,
       {{E::retoken, 1, "jalapeno", "diacritics"},
        {E::retoken, 2, "suace", "spelling"},
        {E::join_next, 9, "", "whitespace"}}},
      {t5,
       {{E::retoken, 3, "burning", "affix"}, {E::retoken, 7, "During", "casing"}}},
      {t6,
       {{E::retoken, 1, "cafe", "diacritics"},
        {E::retoken, 3, "counting", "affix"},
        {E::extra_token, 7, ",", "punctuation"}}},
      {t6,
       {{E::retoken, 0, "the", "casing"},
        {E::retoken, 4, "a", "other"},
        {E::retoken, 9, "cusotmers", "spelling"}}},
      {t7,
       {{E::retoken, 1, "senora", "diacritics"},
        {E::join_next, 4, "", "whitespace"},
        {E::drop_token, 11, "", "punctuation"}}},
      {t7,
       {{E::retoken, 0, "the", "casing"},
        {E::retoken, 2, "rewatched", "affix"},
        {E::swap_next, 4, "", "word_order"}}},
      {t8,
       {{E::retoken, 1, "naive", "diacritics"},
        {E::retoken, 4, "a", "other"},
        {E::join_next, 9, "", "whitespace"}}},
      {t8,
       {{E::retoken, 2, "toruist", "spelling"},
        {E::retoken, 9, "regathered", "affix"},
        {E::drop_token, 11, "", "punctuation"}}},
      {t9,
       {{E::retoken, 0, "the", "casing"}, {E::swap_next, 4, "", "word_order"}}},
      {t9,
       {{E::retoken, 3, "shaping", "affix"},
        {E::extra_token, 7, ",", "punctuation"},
        {E::retoken, 8, "a", "other"}}},
      {t10,
       {{E::retoken, 2, "senor", "diacritics"},
        {E::retoken, 8, "neihgbors", "spelling"},
        {E::join_next, 9, "", "whitespace"}}},
      {t10,
       {{E::retoken, 0, "that", "casing"}, {E::retoken, 9, "reoffered", "affix"}}},
      {t11,
       {{E::retoken, 2, "plnats", "spelling"},
        {E::swap_next, 4, "", "word_order"},
        {E::retoken, 7, "a", "other"}}},
      {t11,
       {{E::swap_next, 4, "", "word_order"},
        {E::join_next, 8, "", "whitespace"},
        {E::drop_token, 11, "", "punctuation"}}},
      {t12,
       {{E::retoken, 3, "chsaed", "spelling"},
        {E::extra_token, 7, ",", "punctuation"}}},
      {t12,
       {{E::join_next, 5, "", "whitespace"}, {E::swap_next, 9, "", "word_order"}}},
  };

  std::vector<textnoise::M2Sentence> out;
  out.reserve(blocks.size());
  for (const BlockSpec& b : blocks) out.push_back(build_block(b));
  return out;
}

// Clean sides of balanced_corpus(), ready to be noised.
inline std::vector<std::vector<std::string>> balanced_clean_pool() {
  std::vector<std::vector<std::string>> out;
  for (const auto& block : balanced_corpus()) {
    out.push_back(textnoise::apply_edits(block).tokens);
  }
  return out;
}

}  // namespace testcorpus
