// Program-to-transducer and program-to-program lowerings, checked against
// the interpreter (and reference transductions) by enumeration.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rasp/lang.hpp"
#include "rasp/lower.hpp"
#include "rasp/oracle.hpp"

#include <fstream>
#include <sstream>

using namespace rasp;

namespace {

TypedProgram corpus(const std::string& stem) {
  return load_program(source_path("corpus/" + stem + ".rasp"));
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

// Compare the lowered pipeline against the interpreter cell-for-cell.
void check_pipeline_matches(const TypedProgram& p, int maxlen) {
  VerifyOptions opt;
  opt.against = Backend::Fst;
  opt.maxlen = maxlen;
  VerifyResult res = verify_program(p, opt);
  INFO(p.name, ": ", res.counterexample, ": ", res.detail);
  CHECK(res.pass);
  CHECK(res.checked > 0);
}

bool score_reads_i(const TypedProgram& p) {
  for (auto& d : p.defs)
    if (d.kind == Def::Kind::Attention && free_vars(*d.attn.score).count('i'))
      return true;
  return false;
}

} // namespace

// ---- score normalization ---------------------------------------------------

TEST_CASE("normalization leaves programs with position-j scores untouched") {
  for (const char* stem : {"increment", "rotate-right", "homomorphism-packed"}) {
    TypedProgram p = corpus(stem);
    CHECK(pretty(normalize_scores(p)) == pretty(p));
  }
}

static const char* kConjScore = R"(
dialect: brasp;
sigma: a b;
gamma: a b;
io: length_preserving;

isa(i) = in(i) = 'a';
isb(i) = in(i) = 'b';
hit(i) = rightmost j [j < i, isa(i) and isb(j)] in(j) : '␣';
out(i) = hit(i) if hit(i) != '␣' else in(i);
)";

static const char* kDisjScore = R"(
dialect: brasp;
sigma: a b;
gamma: a b;
io: length_preserving;

isa(i) = in(i) = 'a';
isb(i) = in(i) = 'b';
hit(i) = leftmost j [j > i, isa(i) or isb(j)] in(j) : in(i);
out(i) = hit(i);
)";

static const char* kEqScore = R"(
dialect: brasp;
sigma: a b;
gamma: a b;
io: length_preserving;

twin(i) = rightmost j [j < i, in(i) = in(j)] in(j) : '␣';
out(i) = twin(i) if twin(i) != '␣' else in(i);
)";

TEST_CASE("profiling a score over its position-i reads preserves behaviour") {
  int casek = 0;
  for (const char* text : {kConjScore, kDisjScore, kEqScore}) {
    TypedProgram p = load_program_text(text, "score-toy" + std::to_string(casek++));
    REQUIRE(score_reads_i(p));
    TypedProgram q = normalize_scores(p);
    CHECK(!score_reads_i(q));
    CHECK(q.defs.size() > p.defs.size());
    for (auto& w : enumerate_words(p.sigma, 6))
      CHECK(run(p, w) == run(q, w));
  }
}

TEST_CASE("normalization profiles a boolean i-read into true and false branches") {
  TypedProgram p = load_program_text(kConjScore, "conj");
  TypedProgram q = normalize_scores(p);
  // one attention per profile of isa(i), plus the position-wise select
  int attn = 0, select = 0;
  for (auto& d : q.defs) {
    if (d.name.rfind("hit$p", 0) == 0) {
      CHECK(d.kind == Def::Kind::Attention);
      attn++;
    }
    if (d.name == "hit") {
      CHECK(d.kind == Def::Kind::PositionWise);
      select++;
    }
  }
  CHECK(attn == 2);
  CHECK(select == 1);
}

// ---- pipelines -------------------------------------------------------------

TEST_CASE("the increment program lowers to a four-stage pipeline") {
  TypedProgram p = corpus("increment");
  Pipeline pl = brasp_to_pipeline(normalize_scores(p));
  CHECK(pl.stages.size() == 4);
  CHECK(pl.final_coords == std::vector<std::string>{"in", "not", "carry", "out"});
  CHECK(pl.out_coord == 3);
  CHECK(joined(run_pipeline_projected(pl, letters("01011"))) == "01100");
  check_pipeline_matches(p, 6);
}

TEST_CASE("the rotate-right program lowers through strictness splitting") {
  TypedProgram p = corpus("rotate-right");
  Pipeline pl = brasp_to_pipeline(normalize_scores(p));
  // identity, right, the three-way split of last, left, out
  CHECK(pl.stages.size() == 7);
  CHECK(joined(run_pipeline_projected(pl, letters("abcbbac"))) == "cabcbba");
  check_pipeline_matches(p, 6);
}

TEST_CASE("packed outputs lower with cell-rendering projections") {
  TypedProgram p = corpus("homomorphism-packed");
  Pipeline pl = brasp_to_pipeline(normalize_scores(p));
  CHECK(pl.stages.size() == 2);
  SymStr cells = run_pipeline_projected(pl, letters("ab"));
  CHECK(cells == SymStr{"aa", "ccb"});
  check_pipeline_matches(p, 6);
}

TEST_CASE("an alias of the input needs only the identity stage") {
  TypedProgram p = load_program_text(
      "dialect: brasp;\nsigma: a b;\ngamma: a b;\nio: length_preserving;\n"
      "out(i) = in(i);\n",
      "echo");
  Pipeline pl = brasp_to_pipeline(p);
  CHECK(pl.stages.size() == 1);
  CHECK(pl.out_coord == 0);
  CHECK(joined(run_pipeline_projected(pl, letters("abba"))) == "abba");
}

static const char* kMaskToys[] = {
    // rightmost j<=i: the latest a seen so far, including here
    "dialect: brasp;\nsigma: a b;\ngamma: a b;\nio: length_preserving;\n"
    "seen(i) = rightmost j [j <= i, in(j) = 'a'] in(j) : '␣';\n"
    "out(i) = seen(i) if seen(i) != '␣' else 'b';\n",
    // leftmost j<=i: the first a up to here
    "dialect: brasp;\nsigma: a b;\ngamma: a b;\nio: length_preserving;\n"
    "first(i) = leftmost j [j <= i, in(j) = 'a'] in(j) : '␣';\n"
    "out(i) = first(i) if first(i) != '␣' else 'b';\n",
    // leftmost j>=i: the next b from here on
    "dialect: brasp;\nsigma: a b;\ngamma: a b;\nio: length_preserving;\n"
    "nxt(i) = leftmost j [j >= i, in(j) = 'b'] in(j) : '␣';\n"
    "out(i) = nxt(i) if nxt(i) != '␣' else 'a';\n",
    // rightmost j>=i: the last b from here on
    "dialect: brasp;\nsigma: a b;\ngamma: a b;\nio: length_preserving;\n"
    "lst(i) = rightmost j [j >= i, in(j) = 'b'] in(j) : '␣';\n"
    "out(i) = lst(i) if lst(i) != '␣' else 'a';\n",
    // unmasked rightmost: the last a anywhere, else the last letter
    "dialect: brasp;\nsigma: a b;\ngamma: a b;\nio: length_preserving;\n"
    "lasta(i) = rightmost j [true, in(j) = 'a'] in(j) : in(i);\n"
    "out(i) = lasta(i);\n",
    // unmasked leftmost over a computed score
    "dialect: brasp;\nsigma: a b;\ngamma: a b;\nio: length_preserving;\n"
    "flip(i) = 'b' if in(i) = 'a' else 'a';\n"
    "firstb(i) = leftmost j [true, flip(j) = 'a'] flip(j) : in(i);\n"
    "out(i) = firstb(i);\n",
};

TEST_CASE("non-strict and unmasked attentions agree with the interpreter") {
  int k = 0;
  for (const char* text : kMaskToys) {
    TypedProgram p = load_program_text(text, "mask-toy" + std::to_string(k++));
    check_pipeline_matches(p, 6);
  }
}

TEST_CASE("every lowered stage is aperiodic") {
  std::vector<TypedProgram> progs = {corpus("increment"), corpus("rotate-right"),
                                     corpus("homomorphism-packed")};
  int k = 0;
  for (const char* text : kMaskToys)
    progs.push_back(load_program_text(text, "mask-toy" + std::to_string(k++)));
  for (auto& p : progs) {
    Pipeline pl = brasp_to_pipeline(normalize_scores(p));
    PipelineAperiodicityReport rep = check_pipeline_aperiodic(pl);
    INFO(p.name);
    CHECK(rep.all_aperiodic);
    CHECK(rep.failures.empty());
  }
}

TEST_CASE("lowering an unnormalized score is refused") {
  TypedProgram p = load_program_text(kConjScore, "conj");
  CHECK_THROWS_AS(brasp_to_pipeline(p), UnnormalizedScore);
  CHECK_NOTHROW(brasp_to_pipeline(normalize_scores(p)));
  check_pipeline_matches(p, 6); // the verifier normalizes first
}

TEST_CASE("lowered pipelines survive the text interchange format") {
  TypedProgram p = corpus("increment");
  Pipeline pl = brasp_to_pipeline(normalize_scores(p));
  std::string f = format_pipeline(pl);
  Pipeline pl2 = parse_pipeline(f);
  CHECK(format_pipeline(pl2) == f);
  for (auto& w : enumerate_words(p.sigma, 5)) {
    if (w.empty()) continue;
    CHECK(run_pipeline_projected(pl, w) == run_pipeline_projected(pl2, w));
  }
  // byte determinism across independent lowerings
  CHECK(format_pipeline(brasp_to_pipeline(normalize_scores(p))) == f);
}

// ---- cascade composition ---------------------------------------------------

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Cascade fixture_cascade(const std::string& rel) {
  Pipeline pl = parse_pipeline(slurp(source_path(rel)));
  return Cascade{pl.stages};
}

TypedProgram packer_over(const std::vector<Sym>& sigma, const std::string& name) {
  std::string text = "dialect: brasp;\nsigma:";
  for (auto& a : sigma) text += " " + a;
  text += ";\ngamma:";
  for (auto& a : sigma) text += " " + a;
  text += ";\nio: packed(1);\n\nout(i) = in(i);\n";
  return load_program_text(text, name);
}

} // namespace

TEST_CASE("composing the replace-after-b cascade onto a packer matches the direct run") {
  Cascade c = fixture_cascade("corpus/fixtures/replace-after-b.cascade");
  TypedProgram p = cascade_to_brasp(packer_over({"a", "b"}, "replace-after-b"), c);
  CHECK(p.convention == Convention::PackedOutput);
  VerifyOptions opt;
  opt.against = Backend::Oracle;
  opt.maxlen = 7;
  VerifyResult res = verify_program(p, opt);
  INFO(res.counterexample, ": ", res.detail);
  CHECK(res.pass);
  CHECK(res.checked == 255);
}

TEST_CASE("composing the backward mark-before-b cascade matches the direct run") {
  Cascade c = fixture_cascade("corpus/fixtures/mark-before-b.cascade");
  TypedProgram p = cascade_to_brasp(packer_over({"a", "b"}, "mark-before-b"), c);
  VerifyOptions opt;
  opt.against = Backend::Oracle;
  opt.maxlen = 7;
  VerifyResult res = verify_program(p, opt);
  INFO(res.counterexample, ": ", res.detail);
  CHECK(res.pass);
}

TEST_CASE("a reset-free echo stage leaves the base program's behaviour unchanged") {
  Dft m;
  m.sigma = {"a", "b"};
  m.gamma = {"a", "b"};
  m.nstates = 2;
  m.q0 = 0;
  m.delta = {{{{"a"}, 0}, {{"b"}, 0}}, {{{"a"}, 1}, {{"b"}, 1}}};
  m.delta_end = {{{}, 0}, {{}, 1}};
  REQUIRE(is_identity_reset(m));
  TypedProgram p = cascade_to_brasp(packer_over({"a", "b"}, "echo"), Cascade{{{m, Dir::L2R}}});
  for (auto& w : enumerate_words({"a", "b"}, 7)) CHECK(run(p, w) == w);
}

TEST_CASE("a cascade composes onto a packed program with longer cells") {
  // after the first c in the packed string, rewrite every b to d
  Dft m;
  m.sigma = {"a", "b", "c"};
  m.gamma = {"a", "b", "c", "d"};
  m.nstates = 2;
  m.q0 = 0;
  m.delta = {{{{"a"}, 0}, {{"b"}, 0}, {{"c"}, 1}},
             {{{"a"}, 1}, {{"d"}, 1}, {{"c"}, 1}}};
  m.delta_end = {{{}, 0}, {{}, 1}};
  REQUIRE(is_identity_reset(m));
  TypedProgram base = corpus("homomorphism-packed");
  TypedProgram p = cascade_to_brasp(base, Cascade{{{m, Dir::L2R}}});
  const Oracle& hom = find_oracle("homomorphism-packed");
  for (auto& w : enumerate_words({"a", "b"}, 6)) {
    SymStr direct = run_dft(m, hom.fn(w));
    CHECK(run(p, w) == direct);
  }
}

TEST_CASE("a stage that swaps states is rejected with its index") {
  Cascade bad = fixture_cascade("corpus/bad/not-identity-reset.cascade");
  Cascade good = fixture_cascade("corpus/fixtures/replace-after-b.cascade");
  Cascade mixed;
  mixed.stages = good.stages;
  mixed.stages.push_back(bad.stages[0]);
  TypedProgram base = packer_over({"a", "b"}, "bad-cascade");
  try {
    cascade_to_brasp(base, mixed);
    FAIL("expected NotIdentityReset");
  } catch (const NotIdentityReset& e) {
    CHECK(e.stage == 2);
  }
}

// ---- arational machines as programs ----------------------------------------

namespace {

DirectedDft identity_stage(const std::vector<Sym>& sigma, Dir dir) {
  return DirectedDft{identity_dft(sigma), dir};
}

// Rotate-right as a single backward machine: remember the first symbol
// scanned (the last of the word), echo the rest shifted, emit it at the end.
DirectedDft rotate_machine(const std::vector<Sym>& sigma) {
  Dft m;
  m.sigma = sigma;
  m.gamma = sigma;
  m.nstates = 1 + (int)sigma.size();
  m.q0 = 0;
  m.delta.assign(m.nstates, {});
  m.delta_end.assign(m.nstates, Dft::Edge{{}, 0});
  for (size_t a = 0; a < sigma.size(); a++) m.delta[0].push_back(Dft::Edge{{}, 1 + (int)a});
  for (size_t q = 0; q < sigma.size(); q++) {
    for (size_t a = 0; a < sigma.size(); a++)
      m.delta[1 + q].push_back(Dft::Edge{{sigma[a]}, 1 + (int)q});
    m.delta_end[1 + q] = Dft::Edge{{sigma[q]}, 1 + (int)q};
  }
  return DirectedDft{m, Dir::R2L};
}

// Its identity-reset decomposition: mark the last position, then one stage
// per symbol tagging every earlier position with one bit of the marked
// symbol's identity, then a forward stage that emits the decoded symbol in
// front of the first position.
Cascade rotate_cascade(const std::vector<Sym>& sigma) {
  auto hat = [](const Sym& s) { return s + "^"; };
  Cascade c;
  { // mark the last position (first scanned backward)
    Dft m;
    m.sigma = sigma;
    for (auto& s : sigma) m.gamma.push_back(hat(s));
    for (auto& s : sigma) m.gamma.push_back(s);
    m.nstates = 2;
    m.q0 = 0;
    m.delta.assign(2, {});
    for (auto& s : sigma) {
      m.delta[0].push_back(Dft::Edge{{hat(s)}, 1});
      m.delta[1].push_back(Dft::Edge{{s}, 1});
    }
    m.delta_end.assign(2, Dft::Edge{{}, 0});
    m.delta_end[1].next = 1;
    c.stages.push_back({m, Dir::R2L});
  }
  // tag stages: after the one for x, every unmarked symbol carries a bit
  // saying whether the marked symbol is x
  std::vector<Sym> plain = sigma; // unmarked alphabet grows a bit per stage
  for (auto& x : sigma) {
    Dft m;
    for (auto& s : sigma) m.sigma.push_back(hat(s));
    for (auto& s : plain) m.sigma.push_back(s);
    std::vector<Sym> next;
    m.nstates = 2;
    m.q0 = 0;
    m.delta.assign(2, {});
    for (auto& s : sigma) { // hats reset to whether the marked symbol is x
      int target = s.rfind(x, 0) == 0 ? 1 : 0;
      m.delta[0].push_back(Dft::Edge{{hat(s)}, target});
      m.delta[1].push_back(Dft::Edge{{hat(s)}, target});
    }
    for (auto& s : plain) {
      m.delta[0].push_back(Dft::Edge{{s + "0"}, 0});
      m.delta[1].push_back(Dft::Edge{{s + "1"}, 1});
      next.push_back(s + "0");
      next.push_back(s + "1");
    }
    for (auto& s : sigma) m.gamma.push_back(hat(s));
    for (auto& s : next) m.gamma.push_back(s);
    m.delta_end.assign(2, Dft::Edge{{}, 0});
    m.delta_end[1].next = 1;
    c.stages.push_back({m, Dir::R2L});
    plain = next;
  }
  { // final forward stage: decode the tag at the first position
    Dft m;
    for (auto& s : sigma) m.sigma.push_back(hat(s));
    for (auto& s : plain) m.sigma.push_back(s);
    m.gamma = sigma;
    m.nstates = 2;
    m.q0 = 0;
    m.delta.assign(2, {});
    auto decode = [&](const Sym& tagged) -> Sym {
      // tagged is a base symbol followed by one bit per alphabet symbol
      std::string bits = tagged.substr(tagged.size() - sigma.size());
      for (size_t k = 0; k < sigma.size(); k++)
        if (bits[k] == '1') return sigma[k];
      return sigma[0]; // unreachable combination; keep the table total
    };
    auto strip = [&](const Sym& tagged) {
      return tagged.substr(0, tagged.size() - sigma.size());
    };
    for (auto& s : sigma) {
      m.delta[0].push_back(Dft::Edge{{s}, 1}); // lone marked symbol: n = 1
      m.delta[1].push_back(Dft::Edge{{}, 1});  // marked symbol later on: drop
    }
    for (auto& s : plain) {
      m.delta[0].push_back(Dft::Edge{{decode(s), strip(s)}, 1});
      m.delta[1].push_back(Dft::Edge{{strip(s)}, 1});
    }
    m.delta_end.assign(2, Dft::Edge{{}, 0});
    m.delta_end[1].next = 1;
    c.stages.push_back({m, Dir::L2R});
  }
  return c;
}

} // namespace

TEST_CASE("identity machines with identity cascades give back the identity") {
  std::vector<Sym> sigma{"a", "b"};
  TypedProgram p = arational_to_brasp(identity_stage(sigma, Dir::L2R),
                                      identity_stage(sigma, Dir::R2L),
                                      Cascade{{identity_stage(sigma, Dir::L2R)}},
                                      Cascade{{identity_stage(sigma, Dir::R2L)}});
  for (auto& w : enumerate_words(sigma, 5)) CHECK(run(p, w) == w);
}

TEST_CASE("increment as a backward machine with its one-stage decomposition") {
  Pipeline pl = parse_pipeline(slurp(source_path("corpus/fixtures/increment-r2l.fst")));
  DirectedDft inc = pl.stages[0];
  REQUIRE(is_identity_reset(inc.machine));
  std::vector<Sym> sigma{"0", "1"};
  TypedProgram p = arational_to_brasp(identity_stage(sigma, Dir::L2R), inc,
                                      Cascade{{identity_stage(sigma, Dir::L2R)}},
                                      Cascade{{inc}});
  CHECK(joined(run(p, letters("01011"))) == "01100");
  TypedProgram ref = corpus("increment");
  for (auto& w : enumerate_words(sigma, 6)) CHECK(run(p, w) == run(ref, w));
}

TEST_CASE("rotate-right splits into a backward machine and a five-stage cascade") {
  std::vector<Sym> sigma{"a", "b", "c"};
  DirectedDft rot = rotate_machine(sigma);
  Cascade c = rotate_cascade(sigma);
  REQUIRE(c.stages.size() == 5);
  for (auto& s : c.stages) REQUIRE(is_identity_reset(s.machine));
  TypedProgram p = arational_to_brasp(identity_stage(sigma, Dir::L2R), rot,
                                      Cascade{{identity_stage(sigma, Dir::L2R)}}, c);
  TypedProgram ref = corpus("rotate-right");
  for (auto& w : enumerate_words(sigma, 6)) CHECK(run(p, w) == run(ref, w));
}

TEST_CASE("a cascade that disagrees with its machine is rejected") {
  std::vector<Sym> sigma{"a", "b"};
  // claim the mark-before-b cascade computes the identity
  Cascade c = fixture_cascade("corpus/fixtures/mark-before-b.cascade");
  CHECK_THROWS_AS(arational_to_brasp(identity_stage(sigma, Dir::L2R),
                                     identity_stage({"a", "b", "x"}, Dir::R2L),
                                     Cascade{{identity_stage(sigma, Dir::L2R)}}, c),
                  CascadeMismatch);
}

// ---- packed segment-reverse / segment-duplicate composition ----------------

namespace {

TypedProgram load_fixture(const std::string& rel) {
  return load_program(source_path(rel));
}

} // namespace

TEST_CASE("segment reverse over the identity packer matches the oracle") {
  TypedProgram base = load_fixture("corpus/fixtures/identity-packer.rasp");
  TypedProgram p = compose_mapreverse(base);
  CHECK(p.convention == Convention::PackedOutput);
  CHECK(p.packed_k == 3);
  CHECK(p.dialect == Dialect::BRASP_POS);
  p.name = "map-reverse-packed";
  VerifyOptions opt;
  opt.against = Backend::Oracle;
  opt.maxlen = 7;
  VerifyResult res = verify_program(p, opt);
  INFO(res.counterexample, ": ", res.detail);
  CHECK(res.pass);
  CHECK(res.checked == 3280);
}

TEST_CASE("segment duplicate over the identity packer matches the oracle") {
  TypedProgram base = load_fixture("corpus/fixtures/identity-packer.rasp");
  TypedProgram p = compose_mapduplicate(base);
  CHECK(p.packed_k == 6);
  p.name = "map-duplicate-packed";
  VerifyOptions opt;
  opt.against = Backend::Oracle;
  opt.maxlen = 7;
  VerifyResult res = verify_program(p, opt);
  INFO(res.counterexample, ": ", res.detail);
  CHECK(res.pass);
}

TEST_CASE("the displayed segment examples come out exactly") {
  TypedProgram wide = packer_over({"a", "b", "c", "d", "e", "f", "g", "|"}, "wide");
  TypedProgram rev = compose_mapreverse(wide);
  CHECK(joined(run(rev, letters("|ab|cde|fg|"))) == "|ba|edc|gf|");
  CHECK(joined(run(rev, letters("abc"))) == "cba");
  CHECK(joined(run(rev, letters("ab|"))) == "ba|");
  CHECK(joined(run(rev, letters("|ab"))) == "|ba");
  CHECK(joined(run(rev, letters("||"))) == "||");
  CHECK(run(rev, SymStr{}).empty());
  TypedProgram dup = compose_mapduplicate(wide);
  CHECK(joined(run(dup, letters("|ab|cde|"))) == "|abab|cdecde|");
  CHECK(joined(run(dup, letters("ab"))) == "abab");
  CHECK(joined(run(dup, letters("a|"))) == "aa|");
  CHECK(joined(run(dup, letters("|"))) == "|");
  CHECK(joined(run(dup, letters("b"))) == "bb");
}

TEST_CASE("segment ops stack on an already-composed packed program") {
  TypedProgram base = load_fixture("corpus/fixtures/identity-packer.rasp");
  TypedProgram p = compose_mapreverse(compose_mapduplicate(base));
  CHECK(p.packed_k == 18);
  const Oracle& orev = find_oracle("map-reverse");
  const Oracle& odup = find_oracle("map-duplicate");
  for (auto& w : enumerate_words({"a", "b", "|"}, 5))
    CHECK(run(p, w) == orev.fn(odup.fn(w)));
}

TEST_CASE("segment reverse of a packed base without separators reverses whole words") {
  TypedProgram base = corpus("homomorphism-packed");
  TypedProgram p = compose_mapreverse(base);
  CHECK(p.packed_k == 9);
  const Oracle& hom = find_oracle("homomorphism-packed");
  for (auto& w : enumerate_words({"a", "b"}, 6)) {
    SymStr expect = hom.fn(w);
    std::reverse(expect.begin(), expect.end());
    CHECK(run(p, w) == expect);
  }
}

// ---- padded composition, homomorphism programs, unpacking ------------------

#include <random>

namespace {

std::vector<std::string> row_show(const Trace& t, const std::string& name) {
  const std::vector<Value>* r = t.row(name);
  REQUIRE(r != nullptr);
  std::vector<std::string> out;
  for (auto& v : *r) out.push_back(show_value(v));
  return out;
}

SymStr hom_map(const std::map<Sym, SymStr>& h, const SymStr& w) {
  SymStr out;
  for (auto& a : w)
    for (auto& g : h.at(a)) out.push_back(g);
  return out;
}

} // namespace

TEST_CASE("a generated homomorphism program reproduces the worked example") {
  std::map<Sym, SymStr> h{{"A", {"a", "a"}}, {"B", {}}, {"C", {"c", "c", "d"}}};
  TypedProgram p = hom_to_srasp(h, {"A", "B", "C"}, {"a", "c", "d"},
                                "homomorphism-srasp");
  CHECK(p.dialect == Dialect::SRASP);
  CHECK(p.convention == Convention::Padded);
  CHECK(minlen_q(p, 4) == 12);

  SymStr w{"A", "B", "B", "C"};
  Trace t = eval(p, {w, 6});
  CHECK(row_show(t, "lens") == std::vector<std::string>{"2", "0", "0", "3", "0", "0"});
  CHECK(row_show(t, "ends") == std::vector<std::string>{"2", "2", "2", "5", "5", "5"});
  CHECK(row_show(t, "starts") == std::vector<std::string>{"0", "2", "2", "2", "5", "5"});
  CHECK(row_show(t, "sym0") == std::vector<std::string>{"A", "␣", "C", "␣", "␣", "␣"});
  CHECK(row_show(t, "sym1") == std::vector<std::string>{"␣", "A", "␣", "C", "␣", "␣"});
  CHECK(row_show(t, "sym2") == std::vector<std::string>{"␣", "␣", "A", "␣", "C", "␣"});
  CHECK(row_show(t, "out") == std::vector<std::string>{"a", "a", "c", "c", "d", "␣"});
  CHECK(joined(run(p, w)) == "aaccd");

  VerifyOptions opt;
  opt.maxlen = 4;
  VerifyResult res = verify_program(p, opt);
  INFO(res.counterexample, ": ", res.detail);
  CHECK(res.pass);
  CHECK(res.checked > 0);
}

TEST_CASE("homomorphism programs match the direct string map") {
  std::vector<Sym> sigma{"a", "b", "c"};
  std::vector<Sym> gamma{"x", "y"};
  std::mt19937 rng(7);
  for (int trial = 0; trial < 6; trial++) {
    std::map<Sym, SymStr> h;
    for (auto& a : sigma) {
      SymStr img;
      int len = (int)(rng() % 4);
      for (int k = 0; k < len; k++) img.push_back(gamma[rng() % gamma.size()]);
      h[a] = img;
    }
    TypedProgram p = hom_to_srasp(h, sigma, gamma, "h");
    for (auto& w : enumerate_words(sigma, 5)) {
      SymStr expect = hom_map(h, w);
      SymStr got = run(p, w);
      INFO("trial ", trial, " on ", joined(w));
      CHECK(got == expect);
      size_t total = 0;
      for (auto& a : w) total += h.at(a).size();
      CHECK(got.size() == total);
    }
  }
}

TEST_CASE("a homomorphism that erases everything gives empty outputs") {
  std::map<Sym, SymStr> h{{"a", {}}, {"b", {}}};
  TypedProgram p = hom_to_srasp(h, {"a", "b"}, {"x"}, "erase");
  CHECK(run(p, letters("abba")).empty());
  CHECK(run(p, SymStr{}).empty());
}

TEST_CASE("ill-formed homomorphisms are refused") {
  CHECK_THROWS_WITH(hom_to_srasp({{"a", {"x"}}}, {"a", "b"}, {"x"}, "h"),
                    doctest::Contains("not defined on symbol 'b'"));
  CHECK_THROWS_WITH(hom_to_srasp({{"a", {"z"}}}, {"a"}, {"x", "y"}, "h"),
                    doctest::Contains("not in the output alphabet"));
}

TEST_CASE("padded composition runs the second program on the first's output") {
  // before: reshape the input through a homomorphism, then take the majority
  std::map<Sym, SymStr> h1{{"a", {"a", "b"}}, {"b", {"b"}}};
  TypedProgram hom1 = hom_to_srasp(h1, {"a", "b"}, {"a", "b"}, "stretch");
  TypedProgram maj = corpus("majority-rules");
  TypedProgram c1 = srasp_compose(hom1, maj);
  CHECK(c1.convention == Convention::Padded);
  const Oracle& omaj = find_oracle("majority-rules");
  for (auto& w : enumerate_words({"a", "b"}, 4))
    CHECK(run(c1, w) == omaj.fn(hom_map(h1, w)));

  // after: mark the square prefixes, then erase the marks and separators
  std::map<Sym, SymStr> h2{
      {"a", {"a"}}, {"b", {"b"}}, {"A", {"a"}}, {"B", {"b"}}, {"|", {}}};
  TypedProgram erase = hom_to_srasp(h2, {"a", "b", "A", "B", "|"}, {"a", "b"},
                                    "erase-marks");
  TypedProgram sq = corpus("marked-square");
  TypedProgram c2 = srasp_compose(sq, erase);
  const Oracle& osq = find_oracle("marked-square");
  for (auto& w : enumerate_words({"a", "b"}, 4))
    CHECK(run(c2, w) == hom_map(h2, osq.fn(w)));
}

TEST_CASE("composition resolves name collisions by prefixing") {
  TypedProgram maj = corpus("majority-rules");
  TypedProgram mm = srasp_compose(maj, maj);
  CHECK(mm.find_def("pa") != nullptr);
  CHECK(mm.find_def("majority-rules$pa") != nullptr);
  const Oracle& omaj = find_oracle("majority-rules");
  for (auto& w : enumerate_words({"a", "b"}, 4))
    CHECK(run(mm, w) == omaj.fn(omaj.fn(w)));
}

TEST_CASE("padded composition is associative in behaviour") {
  TypedProgram cm3 = corpus("count-mod-3");
  TypedProgram left = srasp_compose(srasp_compose(cm3, cm3), cm3);
  TypedProgram right = srasp_compose(cm3, srasp_compose(cm3, cm3));
  for (long l = 0; l <= 6; l++)
    CHECK(minlen_q(left, l) == minlen_q(right, l));
  for (auto& w : enumerate_words({"0", "1", "2"}, 3))
    CHECK(run(left, w) == run(right, w));
}

TEST_CASE("composition demands matching conventions and alphabets") {
  CHECK_THROWS_WITH(srasp_compose(corpus("count-mod-3"), corpus("majority-rules")),
                    doctest::Contains("output alphabet"));
  CHECK_THROWS_WITH(srasp_compose(corpus("increment"), corpus("count-mod-3")),
                    doctest::Contains("padded"));
}

TEST_CASE("unpacking the identity packer gives back the identity") {
  TypedProgram base = load_fixture("corpus/fixtures/identity-packer.rasp");
  TypedProgram u = unpack_packed(base);
  CHECK(u.dialect == Dialect::SRASP);
  CHECK(u.convention == Convention::Padded);
  CHECK(minlen_q(u, 5) == 5);
  for (auto& w : enumerate_words({"a", "b", "|"}, 5))
    CHECK(run(u, w) == w);
}

TEST_CASE("unpacking the packed homomorphism matches its concatenation") {
  TypedProgram u = unpack_packed(corpus("homomorphism-packed"));
  CHECK(joined(run(u, std::string("ab"))) == "aaccb");
  CHECK(minlen_q(u, 2) == 6); // the cell bound, not just the reachable cells
  const Oracle& hom = find_oracle("homomorphism-packed");
  for (auto& w : enumerate_words({"a", "b"}, 4))
    CHECK(run(u, w) == hom.fn(w));
}

TEST_CASE("unpacking the segment duplicator doubles each segment") {
  TypedProgram u = unpack_packed(corpus("map-duplicate"));
  SymStr w = letters("|ab|cde|");
  CHECK(minlen_q(u, 8) == 16);
  CHECK(joined(run(u, w)) == "|abab|cdecde|");
  CHECK(joined(run(u, w, 23)) == "|abab|cdecde|");
  const Oracle& odup = find_oracle("map-duplicate");
  for (auto& v : enumerate_words({"a", "b", "|"}, 3))
    CHECK(run(u, v) == odup.fn(v));
}
