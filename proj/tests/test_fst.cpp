// Transducer core: running machines and pipelines, the aperiodicity and
// identity-reset decision procedures, and the text interchange format.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rasp/fst.hpp"
#include "rasp/oracle.hpp"

#include <fstream>
#include <sstream>

using namespace rasp;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Dft fixture_dft(const std::string& rel) { return parse_dft(slurp(source_path(rel))); }

Pipeline fixture_pipeline(const std::string& rel) {
  return parse_pipeline(slurp(source_path(rel)));
}

std::string joined(const SymStr& w) {
  std::string r;
  for (auto& x : w) r += x;
  return r;
}

SymStr letters(const std::string& s) {
  SymStr w;
  for (char c : s) w.push_back(std::string(1, c));
  return w;
}

} // namespace

TEST_CASE("a one-state machine echoes its input") {
  Dft t = identity_dft({"a", "b", "c"});
  CHECK(joined(run_dft(t, letters("abcba"))) == "abcba");
  CHECK(run_dft(t, {}).empty());
  CHECK(is_aperiodic(t).aperiodic);
  CHECK(is_identity_reset(t));
}

TEST_CASE("the (ab)* acceptor accepts exactly alternations") {
  Dft t = fixture_dft("corpus/fixtures/ab-star.fst");
  auto accepts = [&](const std::string& w) {
    return joined(run_dft(t, letters(w))) == "1";
  };
  CHECK(accepts(""));
  CHECK(accepts("ab"));
  CHECK(accepts("abab"));
  CHECK(accepts("ababab"));
  CHECK(!accepts("a"));
  CHECK(!accepts("b"));
  CHECK(!accepts("ba"));
  CHECK(!accepts("aba"));
  CHECK(!accepts("abba"));
}

TEST_CASE("the (ab)* acceptor is aperiodic") {
  Dft t = fixture_dft("corpus/fixtures/ab-star.fst");
  AperiodicityReport r = is_aperiodic(t);
  CHECK(r.aperiodic);
  CHECK(aperiodic_by_enumeration(t, 4, 2 * t.nstates));
}

TEST_CASE("the (aa)* acceptor is not aperiodic and the witness is the letter a") {
  Dft t = fixture_dft("corpus/fixtures/aa-star.fst");
  auto accepts = [&](const std::string& w) {
    return joined(run_dft(t, letters(w))) == "1";
  };
  CHECK(accepts(""));
  CHECK(accepts("aa"));
  CHECK(!accepts("a"));
  CHECK(!accepts("aaa"));
  AperiodicityReport r = is_aperiodic(t);
  CHECK(!r.aperiodic);
  CHECK(joined(r.witness) == "a");
  CHECK(!aperiodic_by_enumeration(t, 4, 2 * t.nstates));
}

TEST_CASE("the closure procedure and the definitional check agree on every fixture") {
  for (const char* rel : {"corpus/fixtures/ab-star.fst", "corpus/fixtures/aa-star.fst"}) {
    Dft t = fixture_dft(rel);
    CHECK(is_aperiodic(t).aperiodic == aperiodic_by_enumeration(t, 4, 2 * t.nstates));
  }
  for (const char* rel :
       {"corpus/fixtures/increment-r2l.fst", "corpus/fixtures/replace-after-b.cascade",
        "corpus/fixtures/mark-before-b.cascade",
        "corpus/bad/not-identity-reset.cascade",
        "corpus/bad/increment-pipeline-corrupt.fst"}) {
    Pipeline pl = fixture_pipeline(rel);
    for (auto& s : pl.stages)
      CHECK(is_aperiodic(s.machine).aperiodic ==
            aperiodic_by_enumeration(s.machine, 4, 2 * s.machine.nstates));
  }
}

TEST_CASE("a right-to-left stage runs against the reversed word") {
  Pipeline pl = fixture_pipeline("corpus/fixtures/increment-r2l.fst");
  REQUIRE(pl.stages.size() == 1);
  CHECK(pl.stages[0].dir == Dir::R2L);
  CHECK(joined(run_pipeline(pl, letters("01011"))) == "01100");
  CHECK(joined(run_pipeline(pl, letters("0"))) == "1");
  CHECK(joined(run_pipeline(pl, letters("1"))) == "0");
  CHECK(joined(run_pipeline(pl, letters("111"))) == "000");
  // no projection table: projected output is the raw output
  CHECK(run_pipeline_projected(pl, letters("01011")) == run_pipeline(pl, letters("01011")));
}

TEST_CASE("the corrupted increment pipeline differs from the good one on a zero") {
  Pipeline good = fixture_pipeline("corpus/fixtures/increment-r2l.fst");
  Pipeline bad = fixture_pipeline("corpus/bad/increment-pipeline-corrupt.fst");
  CHECK(joined(run_pipeline(bad, letters("0"))) != joined(run_pipeline(good, letters("0"))));
}

TEST_CASE("identity-reset shape holds for the cascade fixtures and fails for the swap") {
  for (const char* rel :
       {"corpus/fixtures/replace-after-b.cascade", "corpus/fixtures/mark-before-b.cascade"})
    for (auto& s : fixture_pipeline(rel).stages) CHECK(is_identity_reset(s.machine));
  Pipeline swap = fixture_pipeline("corpus/bad/not-identity-reset.cascade");
  CHECK(!is_identity_reset(swap.stages[0].machine));
  // a swap of two states is also the canonical non-aperiodic machine
  CHECK(!is_aperiodic(swap.stages[0].machine).aperiodic);
}

TEST_CASE("the replace-after-b cascade computes its description") {
  Pipeline pl = fixture_pipeline("corpus/fixtures/replace-after-b.cascade");
  CHECK(joined(run_pipeline(pl, letters("aabab"))) == "aabcc");
  CHECK(joined(run_pipeline(pl, letters("aaa"))) == "aaa");
  CHECK(joined(run_pipeline(pl, letters("b"))) == "b");
  CHECK(joined(run_pipeline(pl, letters("baaa"))) == "bccc");
}

TEST_CASE("the mark-before-b cascade marks every a with a later b") {
  Pipeline pl = fixture_pipeline("corpus/fixtures/mark-before-b.cascade");
  CHECK(joined(run_pipeline(pl, letters("aabab"))) == "xxbxb");
  CHECK(joined(run_pipeline(pl, letters("aba"))) == "xba");
  CHECK(joined(run_pipeline(pl, letters("aa"))) == "aa");
}

TEST_CASE("machine texts round-trip through format and parse") {
  for (const char* rel : {"corpus/fixtures/ab-star.fst", "corpus/fixtures/aa-star.fst"}) {
    Dft t = fixture_dft(rel);
    std::string f = format_dft(t);
    Dft t2 = parse_dft(f);
    CHECK(format_dft(t2) == f);
    for (auto& w : enumerate_words(t.sigma, 4)) CHECK(run_dft(t, w) == run_dft(t2, w));
  }
  for (const char* rel :
       {"corpus/fixtures/increment-r2l.fst", "corpus/fixtures/replace-after-b.cascade"}) {
    Pipeline pl = fixture_pipeline(rel);
    std::string f = format_pipeline(pl);
    Pipeline pl2 = parse_pipeline(f);
    CHECK(format_pipeline(pl2) == f);
    for (auto& w : enumerate_words(pl.stages[0].machine.sigma, 4))
      CHECK(run_pipeline(pl, w) == run_pipeline(pl2, w));
  }
}

TEST_CASE("malformed machine texts are rejected") {
  CHECK_THROWS(parse_dft("dft\nsigma: a\ngamma: a\nstates: 1\nstart: 0\n"
                         "delta: 0, END -> \"\", 0\n")); // missing 'a' transition
  CHECK_THROWS(parse_dft("dft\nsigma: a\ngamma: a\nstates: 1\nstart: 2\n"
                         "delta: 0, a -> \"a\", 0\ndelta: 0, END -> \"\", 0\n"));
  CHECK_THROWS(parse_dft("dfa\n"));
  CHECK_THROWS(parse_pipeline("pipeline\nstages: 1\n"));
}

TEST_CASE("running a machine on a foreign symbol is an error") {
  Dft t = identity_dft({"a"});
  CHECK_THROWS(run_dft(t, letters("ab")));
}
