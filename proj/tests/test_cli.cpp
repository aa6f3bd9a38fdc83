#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <textnoise/textnoise.hpp>

#include "synthetic_corpus.hpp"

using namespace textnoise;
using Catch::Approx;

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

class Workspace {
 public:
  Workspace() {
    std::string tmpl = (fs::temp_directory_path() / "textnoise_cli_XXXXXX").string();
    REQUIRE(mkdtemp(tmpl.data()) != nullptr);
    dir_ = tmpl;
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    const std::string p = path(name);
    std::ofstream out(p, std::ios::binary);
    REQUIRE(out);
    out << content;
    REQUIRE(out.flush());
    return p;
  }

  RunResult run(const std::string& args, const std::string& stdin_path = "") const {
    const std::string out_path = path("run.stdout");
    const std::string err_path = path("run.stderr");
    std::string cmd = std::string(TEXTNOISE_CLI) + " " + args;
    if (!stdin_path.empty()) cmd += " < " + stdin_path;
    cmd += " > " + out_path + " 2> " + err_path;
    const int status = std::system(cmd.c_str());
    RunResult r;
    if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return "";
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

 private:
  std::string dir_;
};

std::string fixture(const std::string& name) {
  return std::string(TEXTNOISE_FIXTURES) + "/" + name;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

// Serialized M2 text plus space-joined clean lines of the balanced corpus.
std::string balanced_m2_text() { return serialize_m2(testcorpus::balanced_corpus()); }

std::string balanced_clean_text(int repeats) {
  std::string out;
  const auto pool = testcorpus::balanced_clean_pool();
  for (int r = 0; r < repeats; ++r) {
    for (const auto& tokens : pool) {
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += tokens[i];
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace

TEST_CASE("cli usage errors and help") {
  Workspace ws;
  CHECK(ws.run("").code == 1);              // a subcommand is required
  CHECK(ws.run("frobnicate").code == 1);    // unknown subcommand
  CHECK(ws.run("--help").code == 0);
  CHECK(ws.run("noise --no-such-flag").code == 1);
  CHECK(ws.run("estimate --out x.json").code == 1);  // --m2 is required
}

TEST_CASE("cli estimate") {
  Workspace ws;
  const std::string profile = ws.path("profile.json");

  SECTION("reports the corpus error level and writes the profile") {
    const auto r = ws.run("estimate --m2 " + fixture("ten_tokens_one_edit.m2") +
                          " --out " + profile);
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "sentences: 1"));
    CHECK(contains(r.out, "corpus error level: 10.0%"));
    CHECK(contains(r.out, "written: " + profile));
    CHECK(fs::exists(profile));

    const Profile p = load_profile(Workspace::slurp(profile));
    CHECK(corpus_error_level(p) == Approx(0.1));
  }
  SECTION("name, language and role flags flow into the profile") {
    const auto r = ws.run("estimate --m2 " + fixture("ten_tokens_one_edit.m2") +
                          " --name demo --language cs --role test --out " + profile);
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "profile: demo"));
    CHECK(contains(r.out, "language: cs"));
    CHECK(contains(r.out, "role: test"));
  }
  SECTION("multiple --m2 files concatenate") {
    const auto r = ws.run("estimate --m2 " + fixture("sample.m2") + " --m2 " +
                          fixture("ten_tokens_one_edit.m2") + " --out " + profile);
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "sentences: 20"));
  }
  SECTION("bad role is a usage error") {
    const auto r = ws.run("estimate --m2 " + fixture("sample.m2") +
                          " --role banana --out " + profile);
    CHECK(r.code == 1);
    CHECK(contains(r.err, "--role must be development (dev) or test"));
  }
  SECTION("unreadable input is a data error") {
    const auto r = ws.run("estimate --m2 " + ws.path("missing.m2") + " --out " + profile);
    CHECK(r.code == 2);
    CHECK(contains(r.err, "cannot open"));
  }
  SECTION("parse errors carry the file and line") {
    const std::string bad = ws.write("bad.m2", "S one two\nA 5 6|||x|||y|||REQUIRED|||-NONE-|||0\n\n");
    const auto r = ws.run("estimate --m2 " + bad + " --out " + profile);
    CHECK(r.code == 2);
    CHECK(contains(r.err, bad + ": "));
    CHECK(contains(r.err, "line 2"));
  }
}

TEST_CASE("cli noise") {
  Workspace ws;
  const std::string m2 = ws.write("balanced.m2", balanced_m2_text());
  const std::string profile = ws.path("profile.json");
  REQUIRE(ws.run("estimate --m2 " + m2 + " --out " + profile).code == 0);
  const std::string clean = ws.write("clean.txt", balanced_clean_text(3));

  SECTION("same seed reproduces byte-identical output, any thread count") {
    const std::string base = "noise --profile " + profile + " --target-rate 0.2 --seed 5";
    REQUIRE(ws.run(base + " --out " + ws.path("a.txt"), clean).code == 0);
    REQUIRE(ws.run(base + " --out " + ws.path("b.txt"), clean).code == 0);
    REQUIRE(ws.run(base + " --threads 4 --out " + ws.path("c.txt"), clean).code == 0);
    const std::string a = Workspace::slurp(ws.path("a.txt"));
    CHECK(a == Workspace::slurp(ws.path("b.txt")));
    CHECK(a == Workspace::slurp(ws.path("c.txt")));
    CHECK(a != Workspace::slurp(clean));  // at 20% something must change
  }
  SECTION("a seed list writes one file per seed, matching single-seed runs") {
    REQUIRE(ws.run("noise --profile " + profile + " --seed 1,2,3 --out " +
                       ws.path("sweep.txt"), clean)
                .code == 0);
    CHECK(fs::exists(ws.path("sweep.txt.seed1")));
    CHECK(fs::exists(ws.path("sweep.txt.seed2")));
    CHECK(fs::exists(ws.path("sweep.txt.seed3")));
    REQUIRE(ws.run("noise --profile " + profile + " --seed 2 --out " + ws.path("only2.txt"),
                   clean)
                .code == 0);
    CHECK(Workspace::slurp(ws.path("sweep.txt.seed2")) ==
          Workspace::slurp(ws.path("only2.txt")));
    CHECK(Workspace::slurp(ws.path("sweep.txt.seed1")) !=
          Workspace::slurp(ws.path("sweep.txt.seed2")));
  }
  SECTION("a seed list without --out is a usage error") {
    const auto r = ws.run("noise --profile " + profile + " --seed 1,2", clean);
    CHECK(r.code == 1);
    CHECK(contains(r.err, "--seed list needs --out"));
  }
  SECTION("emitted M2 reconstructs the clean input") {
    REQUIRE(ws.run("noise --profile " + profile + " --target-rate 0.3 --seed 9 --out " +
                       ws.path("noisy.txt") + " --emit-m2 " + ws.path("gold.m2"),
                   clean)
                .code == 0);
    const auto gold = parse_m2(Workspace::slurp(ws.path("gold.m2")));
    std::istringstream clean_in(Workspace::slurp(clean));
    std::istringstream noisy_in(Workspace::slurp(ws.path("noisy.txt")));
    std::string cline, nline;
    std::size_t idx = 0;
    while (std::getline(clean_in, cline)) {
      REQUIRE(std::getline(noisy_in, nline));
      REQUIRE(idx < gold.size());
      CHECK(gold[idx].source_tokens == detail::split_space_tokens(nline));
      CHECK(apply_edits(gold[idx]).tokens == detail::split_space_tokens(cline));
      ++idx;
    }
    CHECK(idx == gold.size());
  }
  SECTION("target rate zero copies the input through") {
    REQUIRE(ws.run("noise --profile " + profile + " --target-rate 0 --seed 7 --out " +
                       ws.path("zero.txt"), clean)
                .code == 0);
    CHECK(Workspace::slurp(ws.path("zero.txt")) == Workspace::slurp(clean));
  }
  SECTION("preserve-tokens without an aspect list narrows to kinds 1-4") {
    REQUIRE(ws.run("noise --profile " + profile +
                       " --target-rate 0.3 --seed 6 --preserve-tokens --out " +
                       ws.path("pres.txt"),
                   clean)
                .code == 0);
    std::istringstream clean_in(Workspace::slurp(clean));
    std::istringstream noisy_in(Workspace::slurp(ws.path("pres.txt")));
    std::string cline, nline;
    while (std::getline(clean_in, cline)) {
      REQUIRE(std::getline(noisy_in, nline));
      CHECK(detail::split_space_tokens(nline).size() ==
            detail::split_space_tokens(cline).size());
    }
  }
  SECTION("bad targets and aspect selections are usage errors") {
    CHECK(ws.run("noise --profile " + profile + " --target-rate 1.5", clean).code == 1);
    CHECK(ws.run("noise --profile " + profile + " --target-rate abc", clean).code == 1);
    CHECK(ws.run("noise --profile " + profile + " --aspects 9", clean).code == 1);
    const auto r = ws.run("noise --profile " + profile + " --aspects banana", clean);
    CHECK(r.code == 1);
    CHECK(contains(r.err, "unknown aspect"));
    const auto p = ws.run("noise --profile " + profile +
                              " --preserve-tokens --aspects whitespace", clean);
    CHECK(p.code == 1);
    CHECK(contains(p.err, "preserve-tokenization excludes aspect \"whitespace\""));
  }
  SECTION("explicitly requesting a missing aspect is a data error") {
    const std::string tiny = ws.path("tiny.json");
    REQUIRE(ws.run("estimate --m2 " + fixture("clean.m2") + " --out " + tiny).code == 0);
    const auto r = ws.run("noise --profile " + tiny + " --aspects diacritics", clean);
    CHECK(r.code == 2);
    CHECK(contains(r.err, "aspect unavailable: diacritics"));
  }
  SECTION("detokenized output joins punctuation onto words") {
    const std::string one = ws.write("one.txt", "Hello , world .\n");
    REQUIRE(ws.run("noise --profile " + profile + " --target-rate 0 --detokenize --out " +
                       ws.path("detok.txt"), one)
                .code == 0);
    CHECK(Workspace::slurp(ws.path("detok.txt")) == "Hello, world.\n");
  }
}

TEST_CASE("cli measure") {
  Workspace ws;
  const std::string clean = ws.write("clean.txt", "a b c d\n");
  const std::string noisy = ws.write("noisy.txt", "a b c x\n");

  SECTION("text report") {
    const auto r = ws.run("measure --clean " + clean + " --noisy " + noisy);
    REQUIRE(r.code == 0);
    CHECK(r.out ==
          "sentences:     1\n"
          "clean tokens:  4\n"
          "matches:       3\n"
          "substitutions: 1\n"
          "insertions:    0\n"
          "deletions:     0\n"
          "mean rate:     0.2500\n"
          "std rate:      0.0000\n");
  }
  SECTION("json report") {
    const auto r = ws.run("measure --clean " + clean + " --noisy " + noisy + " --json");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["sentences"] == 1);
    CHECK(j["clean_tokens"] == 4);
    CHECK(j["matches"] == 3);
    CHECK(j["substitutions"] == 1);
    CHECK(j["mean_rate"].get<double>() == Approx(0.25));
  }
  SECTION("plain mode applies the plain-text splitter") {
    const std::string c = ws.write("c.txt", "Hello, world!\n");
    const std::string n = ws.write("n.txt", "Hello world\n");
    const auto r = ws.run("measure --clean " + c + " --noisy " + n + " --plain --json");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["clean_tokens"] == 4);
    CHECK(j["mean_rate"].get<double>() == Approx(0.5));
  }
  SECTION("line count mismatch is a data error") {
    const std::string shorter = ws.write("short.txt", "a b\n");
    const std::string longer = ws.write("long.txt", "a b\nc d\ne f\n");
    const auto r = ws.run("measure --clean " + shorter + " --noisy " + longer);
    CHECK(r.code == 2);
    CHECK(contains(r.err, "line count mismatch: clean has 1 lines, noisy has 3 lines"));
  }
}

TEST_CASE("cli inspect") {
  Workspace ws;
  const std::string m2 = ws.write("balanced.m2", balanced_m2_text());
  const std::string profile = ws.path("profile.json");
  REQUIRE(ws.run("estimate --m2 " + m2 + " --name round --out " + profile).code == 0);

  SECTION("summarizes the profile with table sizes") {
    const auto r = ws.run("inspect --profile " + profile);
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "profile: round"));
    CHECK(contains(r.out, "schema version: "));
    CHECK(contains(r.out, "corpus error level: 27.8%"));
    CHECK(contains(r.out, "lexicon: "));
    CHECK(contains(r.out, "alphabet: "));
    CHECK(contains(r.out, "suffix_table=1"));
    CHECK(contains(r.out, "window_sizes=1"));
  }
  SECTION("missing and malformed profiles are data errors") {
    CHECK(ws.run("inspect --profile " + ws.path("nope.json")).code == 2);
    const std::string junk = ws.write("junk.json", "{\"schema_version\": 99}");
    const auto r = ws.run("inspect --profile " + junk);
    CHECK(r.code == 2);
  }
}
