// Command-line front end: estimate error profiles from M2 annotation files,
// noise corpora with them, measure achieved noise levels, and inspect profile
// files.
//
// Exit codes: 0 success, 1 usage error (bad flags or flag combinations),
// 2 data error (unreadable input, parse or validation failure).

#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "textnoise/textnoise.hpp"

namespace {

using namespace textnoise;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", v * 100.0);
  return buf;
}

std::string prob(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void print_aspect_table(std::ostream& out, const AspectStatsSet& s, bool with_sizes) {
  auto line = [&](const char* name, bool enabled, const std::string& body, bool saturated) {
    out << "  " << name;
    for (std::size_t i = std::string(name).size(); i < 14; ++i) out << ' ';
    if (!enabled) {
      out << "disabled\n";
      return;
    }
    out << body;
    if (saturated) out << "  [saturated]";
    out << '\n';
  };
  auto sz = [&](const char* label, std::size_t n) {
    return with_sizes ? "  " + std::string(label) + "=" + std::to_string(n) : std::string();
  };

  line("diacritics", s.diacritics.has_value(),
       !s.diacritics ? "" :
       "p_sentence=" + prob(s.diacritics->p_sentence) + "  p_char=" + prob(s.diacritics->p_char),
       s.diacritics && s.diacritics->saturated);
  line("casing", s.casing.has_value(),
       !s.casing ? "" :
       "p_first=" + prob(s.casing->p_first) + "  p_other=" + prob(s.casing->p_other),
       s.casing && s.casing->saturated);
  line("spelling", s.spelling.has_value(),
       !s.spelling ? "" :
       "p_word=" + prob(s.spelling->p_word) + sz("ops", s.spelling->ops.size()) +
           sz("insert_chars", s.spelling->insert_chars.size()) +
           sz("replace_pairs", s.spelling->replace_pairs.size()),
       s.spelling && s.spelling->saturated);
  line("affix", s.affix.has_value(),
       !s.affix ? "" :
       "p_word=" + prob(s.affix->p_word) + "  p_suffix=" + prob(s.affix->p_suffix) +
           sz("suffix_table", s.affix->suffix_table.size()) +
           sz("prefix_table", s.affix->prefix_table.size()),
       s.affix && s.affix->saturated);
  line("punctuation", s.punctuation.has_value(),
       !s.punctuation ? "" :
       "p_insert=" + prob(s.punctuation->p_insert) + "  p_remove=" +
           prob(s.punctuation->p_remove) + "  p_replace=" + prob(s.punctuation->p_replace) +
           sz("insert_tokens", s.punctuation->insert_tokens.size()) +
           sz("replace_pairs", s.punctuation->replace_pairs.size()),
       s.punctuation && s.punctuation->saturated);
  line("whitespace", s.whitespace.has_value(),
       !s.whitespace ? "" :
       "p_join=" + prob(s.whitespace->p_join) + "  p_split=" + prob(s.whitespace->p_split),
       s.whitespace && s.whitespace->saturated);
  line("word_order", s.word_order.has_value(),
       !s.word_order ? "" :
       "p_sentence=" + prob(s.word_order->p_sentence) +
           sz("window_sizes", s.word_order->window_sizes.size()),
       s.word_order && s.word_order->saturated);
  line("common_other", s.common_other.has_value(),
       !s.common_other ? "" :
       "p_word=" + prob(s.common_other->p_word) + "  p_gap=" + prob(s.common_other->p_gap) +
           sz("phrase_table", s.common_other->phrase_table.size()) +
           sz("insert_phrases", s.common_other->insert_phrases.size()),
       s.common_other && s.common_other->saturated);
}

// ---- estimate ---------------------------------------------------------------

struct EstimateArgs {
  std::vector<std::string> m2_paths;
  int annotator = 0;
  std::string name = "estimated";
  std::string language = "und";
  std::string role = "development";
  std::string out_path;
};

int run_estimate(const EstimateArgs& args) {
  EstimateOptions opts;
  opts.annotator = args.annotator;
  opts.name = args.name;
  opts.language = args.language;
  const auto role = role_from_name(args.role == "dev" ? "development" : args.role);
  if (!role) throw ConfigError("--role must be development (dev) or test");
  opts.role = *role;

  std::vector<M2Sentence> corpus;
  for (const std::string& path : args.m2_paths) {
    try {
      std::vector<M2Sentence> part = parse_m2(slurp(path));
      corpus.insert(corpus.end(), std::make_move_iterator(part.begin()),
                    std::make_move_iterator(part.end()));
    } catch (const ParseError& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
  }

  const Profile p = estimate_profile(corpus, opts);
  std::ofstream out(args.out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + args.out_path + " for writing");
  out << save_profile(p);
  if (!out.flush()) throw std::runtime_error("write failure on " + args.out_path);

  std::cout << "profile: " << p.name << "\n";
  std::cout << "language: " << p.language << "\n";
  std::cout << "role: " << role_name(p.role) << "\n";
  std::cout << "sentences: " << corpus.size() << "\n";
  std::cout << "corpus error level: " << percent(corpus_error_level(p)) << "\n";
  std::cout << "error amount std: " << prob(p.error_amount.std) << "\n";
  std::cout << "aspects:\n";
  print_aspect_table(std::cout, p.stats, false);
  std::cout << "written: " << args.out_path << "\n";
  return 0;
}

// ---- noise --------------------------------------------------------------------

struct NoiseArgs {
  std::string profile_path;
  std::string target = "corpus";
  std::string aspects;  // empty = all; integer = cumulative level; else name list
  bool preserve_tokens = false;
  std::string seeds = "0";
  std::string emit_m2_path;
  std::string out_path;
  int threads = 1;
  bool detok = false;
};

NoiseConfig parse_noise_config(const NoiseArgs& args, std::uint64_t seed) {
  NoiseConfig config;
  if (args.target != "corpus") {
    try {
      std::size_t used = 0;
      config.target_rate = std::stod(args.target, &used);
      if (used != args.target.size()) throw std::invalid_argument(args.target);
    } catch (const std::exception&) {
      throw ConfigError("--target-rate must be a number in [0,1] or \"corpus\"");
    }
    if (!(*config.target_rate >= 0.0 && *config.target_rate <= 1.0)) {
      throw ConfigError("--target-rate must lie in [0,1]");
    }
  }
  if (!args.aspects.empty()) {
    const bool numeric =
        args.aspects.find_first_not_of("0123456789") == std::string::npos;
    if (numeric) {
      config.cumulative_level = std::stoi(args.aspects);
      if (*config.cumulative_level < 1 || *config.cumulative_level > 8) {
        throw ConfigError("--aspects level must lie in 1..8");
      }
    } else {
      std::stringstream ss(args.aspects);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto kind = aspect_from_name(item);
        if (!kind) throw ConfigError("unknown aspect \"" + item + "\"");
        config.aspects.push_back(*kind);
      }
      if (config.aspects.empty()) throw ConfigError("--aspects list is empty");
    }
  }
  config.preserve_tokenization = args.preserve_tokens;
  config.seed = seed;
  config.emit_m2 = !args.emit_m2_path.empty();
  return config;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--seed must be an unsigned integer or a comma list of them");
    }
  }
  if (seeds.empty()) throw ConfigError("--seed list is empty");
  return seeds;
}

// One pass over stdin, all seeds in parallel per line, ordered emission.
std::size_t noise_stream_multi(std::istream& in, const std::vector<Noiser>& noisers,
                               const std::vector<std::ostream*>& outs,
                               const std::vector<std::ostream*>& m2_outs, int threads,
                               bool detok) {
  const std::size_t n_seeds = noisers.size();
  const std::size_t batch_size = static_cast<std::size_t>(threads < 1 ? 1 : threads) * 64;
  std::vector<std::string> lines;
  std::size_t base_index = 0;

  auto process_batch = [&]() {
    std::vector<std::vector<NoisedSentence>> results(lines.size());
    std::vector<std::exception_ptr> errors(lines.size());
    auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        try {
          const auto tokens = detail::split_space_tokens(lines[i]);
          results[i].reserve(n_seeds);
          for (const Noiser& noiser : noisers) {
            results[i].push_back(noiser.noise_sentence(tokens, base_index + i));
          }
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    if (threads <= 1 || lines.size() < 2) {
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
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const NoisedSentence& ns = results[i][s];
        std::ostream& o = *outs[s];
        if (detok) {
          o << detokenize(ns.tokens) << '\n';
        } else {
          for (std::size_t t = 0; t < ns.tokens.size(); ++t) {
            if (t > 0) o << ' ';
            o << ns.tokens[t];
          }
          o << '\n';
        }
        if (!m2_outs.empty() && m2_outs[s]) *m2_outs[s] << serialize_m2(to_m2_sentence(ns));
      }
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

int run_noise(const NoiseArgs& args) {
  const std::vector<std::uint64_t> seeds = parse_seeds(args.seeds);
  const bool sweep = seeds.size() > 1;
  if (sweep && args.out_path.empty()) {
    throw ConfigError("a --seed list needs --out to write per-seed files");
  }

  const Profile profile = load_profile(slurp(args.profile_path));
  std::vector<Noiser> noisers;
  noisers.reserve(seeds.size());
  for (std::uint64_t s : seeds) noisers.emplace_back(profile, parse_noise_config(args, s));

  std::vector<std::unique_ptr<std::ofstream>> owned;
  std::vector<std::ostream*> outs;
  std::vector<std::ostream*> m2_outs;
  auto open_out = [&](const std::string& path) -> std::ostream* {
    owned.push_back(std::make_unique<std::ofstream>(path, std::ios::binary));
    if (!*owned.back()) throw std::runtime_error("cannot open " + path + " for writing");
    return owned.back().get();
  };
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const std::string suffix = sweep ? ".seed" + std::to_string(seeds[i]) : "";
    if (args.out_path.empty()) {
      outs.push_back(&std::cout);
    } else {
      outs.push_back(open_out(args.out_path + suffix));
    }
    if (!args.emit_m2_path.empty()) {
      m2_outs.push_back(open_out(args.emit_m2_path + suffix));
    }
  }

  noise_stream_multi(std::cin, noisers, outs, m2_outs, args.threads, args.detok);

  for (auto& f : owned) {
    if (!f->flush()) throw std::runtime_error("write failure on output file");
  }
  std::cout.flush();
  return 0;
}

// ---- measure --------------------------------------------------------------------

struct MeasureArgs {
  std::string clean_path;
  std::string noisy_path;
  bool json = false;
  bool plain = false;
};

int run_measure(const MeasureArgs& args) {
  std::ifstream clean(args.clean_path, std::ios::binary);
  if (!clean) throw std::runtime_error("cannot open " + args.clean_path);
  std::ifstream noisy(args.noisy_path, std::ios::binary);
  if (!noisy) throw std::runtime_error("cannot open " + args.noisy_path);
  const CorpusReport report = measure_streams(clean, noisy, args.plain);
  if (args.json) {
    std::cout << report_json(report).dump(2) << "\n";
  } else {
    std::cout << report_text(report);
  }
  return 0;
}

// ---- inspect ---------------------------------------------------------------------

int run_inspect(const std::string& profile_path) {
  const Profile p = load_profile(slurp(profile_path));
  std::cout << "profile: " << p.name << "\n";
  std::cout << "language: " << p.language << "\n";
  std::cout << "role: " << role_name(p.role) << "\n";
  std::cout << "schema version: " << p.schema_version << "\n";
  std::cout << "corpus error level: " << percent(corpus_error_level(p)) << "\n";
  std::cout << "error amount std: " << prob(p.error_amount.std) << "\n";
  std::cout << "lexicon: " << p.stats.lexicon.size() << " words\n";
  std::cout << "alphabet: " << p.stats.alphabet.size() << " characters\n";
  std::cout << "aspects:\n";
  print_aspect_table(std::cout, p.stats, true);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpus-driven text noising: estimate, noise, measure, inspect"};
  app.require_subcommand(1);

  EstimateArgs est;
  CLI::App* cmd_est = app.add_subcommand("estimate", "estimate an error profile from M2 files");
  cmd_est->add_option("--m2", est.m2_paths, "M2 annotation file(s)")->required();
  cmd_est->add_option("--annotator", est.annotator, "annotator id to learn from (default 0)");
  cmd_est->add_option("--name", est.name, "profile name");
  cmd_est->add_option("--language", est.language, "language tag");
  cmd_est->add_option("--role", est.role, "development|test");
  cmd_est->add_option("--out", est.out_path, "output profile path")->required();

  NoiseArgs noi;
  CLI::App* cmd_noi = app.add_subcommand("noise", "noise stdin line by line");
  cmd_noi->add_option("--profile", noi.profile_path, "profile file")->required();
  cmd_noi->add_option("--target-rate", noi.target, "rate in [0,1] or \"corpus\"");
  cmd_noi->add_option("--aspects", noi.aspects,
                      "cumulative level 1..8 or comma-separated aspect names");
  cmd_noi->add_flag("--preserve-tokens", noi.preserve_tokens,
                    "keep tokenization intact (aspects 1-4 only)");
  cmd_noi->add_option("--seed", noi.seeds, "seed or comma list of seeds");
  cmd_noi->add_option("--emit-m2", noi.emit_m2_path, "write gold edits to this M2 file");
  cmd_noi->add_option("--out", noi.out_path,
                      "output path (required for seed lists; default stdout)");
  cmd_noi->add_option("--threads", noi.threads, "worker threads (output is identical)");
  cmd_noi->add_flag("--detokenize", noi.detok, "emit plain text instead of tokens");

  MeasureArgs mea;
  CLI::App* cmd_mea = app.add_subcommand("measure", "measure noise between two files");
  cmd_mea->add_option("--clean", mea.clean_path, "clean text file")->required();
  cmd_mea->add_option("--noisy", mea.noisy_path, "noisy text file")->required();
  cmd_mea->add_flag("--json", mea.json, "print the report as JSON");
  cmd_mea->add_flag("--plain", mea.plain, "tokenize with the plain-text splitter");

  std::string inspect_path;
  CLI::App* cmd_ins = app.add_subcommand("inspect", "print a profile summary");
  cmd_ins->add_option("--profile", inspect_path, "profile file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_est->parsed()) return run_estimate(est);
    if (cmd_noi->parsed()) return run_noise(noi);
    if (cmd_mea->parsed()) return run_measure(mea);
    if (cmd_ins->parsed()) return run_inspect(inspect_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
