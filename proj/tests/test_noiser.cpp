#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <textnoise/textnoise.hpp>

#include "synthetic_corpus.hpp"

using namespace textnoise;
using Catch::Approx;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Profile sample_profile() {
  static const Profile p = estimate_profile(
      parse_m2(read_file(std::string(TEXTNOISE_FIXTURES) + "/sample.m2")));
  return p;
}

// Mean of a Normal(mean, std) truncated to [0, 1], via Simpson quadrature;
// an independent reference for the sampler.
double truncated_normal_mean(double mean, double std) {
  const int n = 4000;  // even
  const double h = 1.0 / n;
  auto phi = [&](double x) {
    const double z = (x - mean) / std;
    return std::exp(-0.5 * z * z);
  };
  double mass = 0.0, first = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    mass += w * phi(x);
    first += w * x * phi(x);
  }
  return first / mass;
}

std::vector<std::string> toks(const std::string& line) {
  return detail::split_space_tokens(line);
}

}  // namespace

TEST_CASE("sample_sentence_rate returns the mean exactly when std is zero") {
  Rng rng(1);
  CHECK(sample_sentence_rate({0.17, 0.0}, rng) == 0.17);
  CHECK(sample_sentence_rate({-0.3, 0.0}, rng) == 0.0);
  CHECK(sample_sentence_rate({1.7, 0.0}, rng) == 1.0);
}

TEST_CASE("sample_sentence_rate draws a truncated normal") {
  const ErrorAmount ea{0.1, 0.05};
  Rng rng(2718);
  const int n = 200000;
  double sum = 0.0;
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = sample_sentence_rate(ea, rng);
    REQUIRE(r >= 0.0);
    REQUIRE(r <= 1.0);
    sum += r;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  const double expected = truncated_normal_mean(ea.mean, ea.std);
  CHECK(sum / n == Approx(expected).margin(0.001));
  // truncation bites: with this mean/std the left tail would go negative
  CHECK(lo < 0.02);
  CHECK(hi > 0.2);
}

TEST_CASE("selection: cumulative levels skip absent aspects silently") {
  Profile p;
  p.error_amount = {0.1, 0.0};
  p.stats.affix = AffixStats{0.05, 1.0, {{"ed", {{"ing", 1.0}}}}, {}, false};

  NoiseConfig cfg;
  cfg.cumulative_level = 3;  // diacritics+casing+spelling, none present
  CHECK(Noiser(p, cfg).selection().empty());

  cfg.cumulative_level = 4;
  CHECK(Noiser(p, cfg).selection() == std::vector<AspectKind>{AspectKind::affix});

  // explicit selection is strict about availability
  NoiseConfig strict;
  strict.aspects = {AspectKind::spelling};
  CHECK_THROWS_AS(Noiser(p, strict), AspectUnavailableError);

  NoiseConfig ok;
  ok.aspects = {AspectKind::affix};
  CHECK(Noiser(p, ok).selection() == std::vector<AspectKind>{AspectKind::affix});
}

TEST_CASE("selection: default is every enabled aspect in canonical order") {
  const Noiser noiser(sample_profile(), NoiseConfig{});
  CHECK(noiser.selection() ==
        std::vector<AspectKind>{AspectKind::diacritics, AspectKind::casing,
                                AspectKind::spelling, AspectKind::affix,
                                AspectKind::punctuation, AspectKind::whitespace,
                                AspectKind::word_order, AspectKind::common_other});
}

TEST_CASE("selection: preserve_tokenization forbids shape-changing aspects") {
  NoiseConfig cfg;
  cfg.preserve_tokenization = true;
  cfg.aspects = {AspectKind::casing, AspectKind::punctuation};
  CHECK_THROWS_AS(Noiser(sample_profile(), cfg), ConfigError);

  NoiseConfig lvl;
  lvl.preserve_tokenization = true;
  lvl.cumulative_level = 6;
  CHECK_THROWS_AS(Noiser(sample_profile(), lvl), ConfigError);

  NoiseConfig fine;
  fine.preserve_tokenization = true;
  fine.cumulative_level = 4;
  CHECK(Noiser(sample_profile(), fine).selection().size() == 4);

  // With no explicit selection the flag narrows instead of conflicting.
  NoiseConfig dflt;
  dflt.preserve_tokenization = true;
  CHECK(Noiser(sample_profile(), dflt).selection() ==
        std::vector<AspectKind>{AspectKind::diacritics, AspectKind::casing,
                                AspectKind::spelling, AspectKind::affix});
}

TEST_CASE("a zero target rate reproduces the input verbatim") {
  NoiseConfig cfg;
  cfg.target_rate = 0.0;
  cfg.emit_m2 = true;
  const Noiser noiser(sample_profile(), cfg);
  const auto clean = toks("Žluťoučký kůň se napil .");
  for (std::uint64_t i = 0; i < 50; ++i) {
    const NoisedSentence s = noiser.noise_sentence(clean, i);
    CHECK(s.tokens == clean);
    CHECK(s.gold_edits.empty());
    CHECK(s.sampled_rate == 0.0);
  }
}

TEST_CASE("noising is deterministic in seed and sentence index") {
  NoiseConfig cfg;
  cfg.target_rate = 0.3;
  cfg.seed = 99;
  cfg.emit_m2 = true;
  const Noiser noiser(sample_profile(), cfg);
  const auto clean = toks("She received a letter and went home yesterday .");

  const NoisedSentence a = noiser.noise_sentence(clean, 7);
  const NoisedSentence b = noiser.noise_sentence(clean, 7);
  CHECK(a.tokens == b.tokens);
  CHECK(a.gold_edits == b.gold_edits);
  CHECK(a.sampled_rate == b.sampled_rate);

  // a fresh construction from the same inputs matches too
  const Noiser again(sample_profile(), cfg);
  const NoisedSentence c = again.noise_sentence(clean, 7);
  CHECK(c.tokens == a.tokens);

  // different sentence index draws an independent stream
  bool any_difference = false;
  for (std::uint64_t i = 0; i < 20; ++i) {
    if (noiser.noise_sentence(clean, i).tokens != a.tokens) any_difference = true;
  }
  CHECK(any_difference);
}

TEST_CASE("emitted annotations restore the clean sentence exactly") {
  NoiseConfig cfg;
  cfg.target_rate = 0.4;
  cfg.seed = 5;
  cfg.emit_m2 = true;
  const Noiser noiser(sample_profile(), cfg);

  const std::vector<std::string> corpus_lines = {
      "Žluťoučký kůň se napil vody u řeky .",
      "She received a brake pedal for the car .",
      "I really depend on him , he said .",
      "Numbers like 42 should stay untouched today .",
      "The sun is hot and the sky is blue .",
      "They counted the votes in London together .",
  };
  std::size_t noised_count = 0;
  for (std::uint64_t idx = 0; idx < 300; ++idx) {
    const auto clean = toks(corpus_lines[idx % corpus_lines.size()]);
    const NoisedSentence s = noiser.noise_sentence(clean, idx);
    CAPTURE(idx, s.tokens);
    // applying the gold corrections to the noised tokens restores the input
    const CorrectedSentence back = apply_edits(to_m2_sentence(s));
    REQUIRE(back.tokens == clean);
    if (s.tokens != clean) ++noised_count;
    // the emitted block is well-formed: it survives its own serialization
    const std::string block = serialize_m2(to_m2_sentence(s));
    const auto reparsed = parse_m2(block);
    REQUIRE(reparsed.size() == 1);
    CHECK(reparsed[0].source_tokens == s.tokens);
    CHECK(reparsed[0].edits == s.gold_edits);
    // every edit is tagged with the aspect that produced it
    for (const Edit& e : s.gold_edits) {
      CHECK(aspect_from_name(e.error_type).has_value());
    }
  }
  CHECK(noised_count > 150);  // at this level most sentences change
}

TEST_CASE("a diacritics-only profile strips and annotates the example phrase") {
  Profile p;
  p.name = "dia";
  p.error_amount = {0.5, 0.0};
  p.stats.diacritics = DiacriticsStats{1.0, 1.0, false};

  NoiseConfig cfg;
  cfg.emit_m2 = true;
  const Noiser noiser(p, cfg);
  const NoisedSentence s = noiser.noise_sentence({"Žluťoučký", "kůň"}, 0);
  CHECK(s.tokens == std::vector<std::string>{"Zlutoucky", "kun"});
  REQUIRE(s.gold_edits.size() == 2);
  CHECK(s.gold_edits[0] == Edit{0, 1, {"Žluťoučký"}, "diacritics", 0});
  CHECK(s.gold_edits[1] == Edit{1, 2, {"kůň"}, "diacritics", 0});
}

TEST_CASE("preserve_tokenization holds token counts under heavy noise") {
  NoiseConfig cfg;
  cfg.target_rate = 0.5;
  cfg.preserve_tokenization = true;
  cfg.cumulative_level = 4;
  cfg.seed = 11;
  const Noiser noiser(sample_profile(), cfg);
  for (std::uint64_t idx = 0; idx < 200; ++idx) {
    const auto clean = toks("Žluťoučký kůň se napil vody a utekl domů večer .");
    const NoisedSentence s = noiser.noise_sentence(clean, idx);
    CHECK(s.tokens.size() == clean.size());
  }
}

TEST_CASE("noise_corpus indexes sentences like repeated noise_sentence calls") {
  NoiseConfig cfg;
  cfg.target_rate = 0.3;
  cfg.seed = 4;
  const Noiser noiser(sample_profile(), cfg);
  const std::vector<std::vector<std::string>> sentences = {
      toks("the sun is hot ."), toks("she went home ."), toks("I depend on him .")};
  const auto bulk = noise_corpus(sentences, sample_profile(), cfg);
  REQUIRE(bulk.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(bulk[i].tokens == noiser.noise_sentence(sentences[i], i).tokens);
  }
}

TEST_CASE("noise_stream emits ordered lines and optional annotations") {
  NoiseConfig cfg;
  cfg.target_rate = 0.3;
  cfg.seed = 21;
  cfg.emit_m2 = true;
  const Noiser noiser(sample_profile(), cfg);

  std::string input;
  std::vector<std::string> clean_lines;
  for (int i = 0; i < 500; ++i) {
    clean_lines.push_back("she received a letter and went home on day " +
                          std::to_string(i) + " .");
    input += clean_lines.back();
    input += '\n';
  }

  std::istringstream in1(input);
  std::ostringstream out1, m21;
  NoiseStreamOptions opt1;
  opt1.m2_out = &m21;
  const std::size_t n1 = noise_stream(in1, out1, noiser, opt1);
  CHECK(n1 == clean_lines.size());

  // thread count must not change a single byte of either stream
  std::istringstream in4(input);
  std::ostringstream out4, m24;
  NoiseStreamOptions opt4;
  opt4.threads = 4;
  opt4.m2_out = &m24;
  const std::size_t n4 = noise_stream(in4, out4, noiser, opt4);
  CHECK(n4 == n1);
  CHECK(out4.str() == out1.str());
  CHECK(m24.str() == m21.str());

  // the sidecar annotations restore each clean line
  const auto blocks = parse_m2(m21.str());
  REQUIRE(blocks.size() == clean_lines.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    CHECK(apply_edits(blocks[i]).tokens == toks(clean_lines[i]));
  }

  // matching line count between the noisy stream and the input
  std::size_t newline_count = 0;
  for (char c : out1.str()) newline_count += (c == '\n');
  CHECK(newline_count == clean_lines.size());
}

TEST_CASE("noise_stream reports the failing line on bad input") {
  const Noiser noiser(sample_profile(), NoiseConfig{});
  std::istringstream in("fine line\nbroken \xFF token\n");
  std::ostringstream out;
  try {
    noise_stream(in, out, noiser);
    FAIL("expected a line error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("detokenize attaches punctuation naturally") {
  CHECK(detokenize({"Hello", ",", "world", "."}) == "Hello, world.");
  CHECK(detokenize({"Is", "it", "?"}) == "Is it?");
  CHECK(detokenize({"(", "aside", ")", "text"}) == "(aside) text");
  CHECK(detokenize({"a", "[", "b", "]", ";"}) == "a [b];");
  CHECK(detokenize({"don't", "stop"}) == "don't stop");
  CHECK(detokenize({}) == "");
}

TEST_CASE("noise_stream can detokenize its output") {
  Profile p;  // no aspects: output equals input tokens
  p.error_amount = {0.0, 0.0};
  const Noiser noiser(p, NoiseConfig{});
  std::istringstream in("Hello , world .\n");
  std::ostringstream out;
  NoiseStreamOptions opt;
  opt.detokenize = true;
  noise_stream(in, out, noiser, opt);
  CHECK(out.str() == "Hello, world.\n");
}

TEST_CASE("scaled noising tracks the requested rate on a matched corpus") {
  // Rate fidelity is only meaningful on text shaped like the estimation
  // corpus: the profile records how often units (words, accents, gaps...)
  // are edited, so replaying it onto text with a wildly different unit mix
  // shifts the achieved rate. The balanced corpus is built so every edit's
  // span equals its alignment cost and every sentence carries the units
  // each error family needs; noising its own clean sides must then land
  // near any requested rate, and monotonically in the target.
  const auto corpus = testcorpus::balanced_corpus();
  const Profile p = estimate_profile(corpus);
  REQUIRE(corpus_error_level(p) == Approx(80.0 / 288.0));

  const auto pool = testcorpus::balanced_clean_pool();
  double prev = 0.0;
  for (const double target : {0.05, 0.10, 0.20, 0.30}) {
    NoiseConfig cfg;
    cfg.seed = 31;
    cfg.target_rate = target;
    const Noiser noiser(p, cfg);
    std::vector<std::vector<std::string>> clean;
    std::vector<std::vector<std::string>> noisy;
    for (int i = 0; i < 2400; ++i) {
      clean.push_back(pool[static_cast<std::size_t>(i) % pool.size()]);
      noisy.push_back(noiser.noise_sentence(clean.back(), i).tokens);
    }
    const CorpusReport r = measure_corpus(clean, noisy);
    INFO("target " << target << " achieved " << r.mean_rate);
    CHECK(r.mean_rate == Approx(target).epsilon(0.15));
    CHECK(r.mean_rate > prev);
    prev = r.mean_rate;
  }
}
