#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rasp/lang.hpp"
#include "rasp/oracle.hpp"

using namespace rasp;

namespace {

const std::vector<std::string> kCorpus = {
    "increment",         "rotate-right",  "homomorphism-packed",
    "map-reverse",       "map-duplicate", "copy-first-half",
    "residues-mod-2",    "residues-mod-3", "residues-mod-5",
    "homomorphism-srasp", "marked-square", "majority-rules",
    "count-mod-3",
};

std::string corpus_file(const std::string& name) {
  return source_path("corpus/" + name + ".rasp");
}

} // namespace

TEST_CASE("every corpus program parses and typechecks") {
  for (auto& name : kCorpus) {
    CAPTURE(name);
    TypedProgram p = load_program(corpus_file(name));
    CHECK(p.name == name);
    CHECK(p.find_def("out") != nullptr);
  }
}

TEST_CASE("fixture programs parse and typecheck") {
  CHECK_NOTHROW(load_program(source_path("corpus/fixtures/identity-packer.rasp")));
  CHECK_NOTHROW(load_program(source_path("corpus/fixtures/count-mod-3-acd.rasp")));
  CHECK_NOTHROW(load_program(source_path("corpus/bad/marked-square-corrupt.rasp")));
}

TEST_CASE("pretty-print round trip is stable and preserves meaning") {
  for (auto& name : kCorpus) {
    CAPTURE(name);
    Program p1 = parse_file(corpus_file(name));
    std::string s1 = pretty(p1);
    Program p2 = parse(s1, name);
    std::string s2 = pretty(p2);
    CHECK(s1 == s2);
    CHECK_NOTHROW(typecheck(desugar(p2)));
  }
}

TEST_CASE("desugar is idempotent") {
  for (auto& name : kCorpus) {
    CAPTURE(name);
    Program d1 = desugar(parse_file(corpus_file(name)));
    Program d2 = desugar(d1);
    CHECK(pretty(d1) == pretty(d2));
  }
}

TEST_CASE("desugar expands numerals, neighbors and subscripts") {
  Program p = parse(R"(
dialect: brasp_pos;
sigma: a b;
gamma: a b;
io: length_preserving;
k(i) = pos(i) + 3;
prv(i) = pos(i-1);
out(i) = in(k(i));
)");
  Program d = desugar(p);
  std::string s = pretty(d);
  // numeral 3 is built from 1s by clipped addition
  CHECK(s.find("3") == std::string::npos);
  // neighbor read becomes its own attention def
  CHECK(d.defs.size() > p.defs.size());
  // subscript read becomes an equality attention
  bool has_eq_attn = false;
  for (auto& dd : d.defs)
    if (dd.kind == Def::Kind::Attention && dd.attn.score &&
        dd.attn.score->kind == Expr::Kind::Cmp)
      has_eq_attn = true;
  CHECK(has_eq_attn);
  CHECK_NOTHROW(typecheck(d));
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse("sigma: a;\nout(i) = in(i);"), ParseError); // missing dialect
  CHECK_THROWS_AS(parse("dialect: brasp;\nsigma: a;\ngamma: a;\nio: length_preserving;\n"),
                  ParseError); // no out
  CHECK_THROWS_AS(parse("dialect: nosuch; out(i) = in(i);"), ParseError);
  try {
    parse("dialect: brasp;\nsigma: a;\ngamma: a;\nio: length_preserving;\nout(i) = ;\n");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line == 5);
  }
}

TEST_CASE("chained clipped arithmetic must be parenthesized") {
  CHECK_THROWS_AS(parse(R"(
dialect: brasp_pos;
sigma: a;
gamma: a;
io: length_preserving;
x(i) = pos(i) + pos(i) + pos(i);
out(i) = in(i);
)"),
                  ParseError);
}

namespace {
Program brasp_wrap(const std::string& defs) {
  return parse("dialect: brasp;\nsigma: a b;\ngamma: a b;\nio: length_preserving;\n" +
               defs);
}
Program pos_wrap(const std::string& defs) {
  return parse("dialect: brasp_pos;\nsigma: a b;\ngamma: a b;\nio: length_preserving;\n" +
               defs);
}
} // namespace

TEST_CASE("dialect gates") {
  // positions only exist beyond the base dialect
  CHECK_THROWS_AS(typecheck(desugar(brasp_wrap("out(i) = in(i) if pos(i) = pos(i) else in(i);"))),
                  TypeError);
  // numerals too
  CHECK_THROWS_AS(typecheck(desugar(brasp_wrap("x(i) = 1;\nout(i) = in(i);"))), TypeError);
  // prefix sums need the counting dialect
  CHECK_THROWS_AS(typecheck(desugar(pos_wrap("s(i) = sum j [j <= i] (1 if in(j) = 'a' else 0);\nout(i) = in(i);"))),
                  TypeError);
  // padded io implies the counting dialect (parse-level)
  CHECK_THROWS_AS(parse("dialect: brasp;\nsigma: a;\ngamma: a;\nio: padded;\nout(i) = in(i);"),
                  ParseError);
}

TEST_CASE("free-variable discipline is enforced while parsing") {
  // value may only read at j
  CHECK_THROWS_AS(brasp_wrap("x(i) = leftmost j [true] in(i) : 'a';\nout(i) = in(i);"),
                  ParseError);
  // default may only read at i
  CHECK_THROWS_AS(brasp_wrap("x(i) = leftmost j [true] in(j) : in(j);\nout(i) = in(i);"),
                  ParseError);
  // position-wise bodies may not read at j
  CHECK_THROWS_AS(brasp_wrap("x(i) = in(j);\nout(i) = in(i);"), ParseError);
}

TEST_CASE("cross-position comparisons are equality of plain reads only") {
  // ordered cross-position comparison is out
  CHECK_THROWS_AS(typecheck(desugar(pos_wrap(
                      "x(i) = leftmost j [true, pos(i) < pos(j)] in(j) : in(i);\nout(i) = in(i);"))),
                  TypeError);
  // equality of compound operands is out
  CHECK_THROWS_AS(typecheck(desugar(pos_wrap(
                      "x(i) = leftmost j [true, pos(i) + 1 = pos(j)] in(j) : in(i);\nout(i) = in(i);"))),
                  TypeError);
  // plain read = plain read is fine
  CHECK_NOTHROW(typecheck(desugar(pos_wrap(
      "x(i) = leftmost j [true, pos(i) = pos(j)] in(j) : in(i);\nout(i) = in(i);"))));
}

TEST_CASE("table coverage") {
  // non-default key missing and no default
  CHECK_THROWS_AS(typecheck(desugar(brasp_wrap(
                      "table t { 'a' -> 'b'; }\nout(i) = t(in(i));"))),
                  TypeError);
  // default fixes it
  CHECK_NOTHROW(typecheck(desugar(brasp_wrap(
      "table t { 'a' -> 'b'; default -> 'a'; }\nout(i) = t(in(i));"))));
}

TEST_CASE("output discipline per convention") {
  // length-preserving out must be symbols
  CHECK_THROWS_AS(typecheck(desugar(brasp_wrap("out(i) = in(i) . in(i);"))), TypeError);
  // out symbols must stay within gamma (plus pad)
  CHECK_THROWS_AS(typecheck(desugar(brasp_wrap("out(i) = 'z';"))), TypeError);
  CHECK_NOTHROW(typecheck(desugar(brasp_wrap("out(i) = '␣';")))); // pad allowed
  // packed cells must respect the declared bound
  CHECK_THROWS_AS(
      typecheck(desugar(parse("dialect: brasp;\nsigma: a;\ngamma: a;\nio: packed(2);\n"
                              "out(i) = (in(i) . in(i)) . in(i);"))),
      TypeError);
  CHECK_NOTHROW(
      typecheck(desugar(parse("dialect: brasp;\nsigma: a;\ngamma: a;\nio: packed(2);\n"
                              "out(i) = in(i) . in(i);"))));
}

TEST_CASE("duplicate and reserved names are rejected") {
  CHECK_THROWS_AS(parse("dialect: brasp;\nsigma: a;\ngamma: a;\nio: length_preserving;\n"
                        "x(i) = in(i);\nx(i) = in(i);\nout(i) = x(i);"),
                  ParseError);
  CHECK_THROWS_AS(parse("dialect: brasp;\nsigma: a;\ngamma: a;\nio: length_preserving;\n"
                        "in(i) = in(i);\nout(i) = in(i);"),
                  ParseError);
}

TEST_CASE("use before definition is rejected") {
  CHECK_THROWS_AS(typecheck(desugar(brasp_wrap("x(i) = y(i);\ny(i) = in(i);\nout(i) = in(i);"))),
                  TypeError);
}

TEST_CASE("raw string literals split into declared symbols") {
  Program p = parse(R"(
dialect: brasp;
sigma: a b;
gamma: aa bb;
io: packed(2);
table t { 'a' -> "aabb"; default -> ""; }
out(i) = t(in(i));
)");
  TypedProgram tp = typecheck(desugar(p));
  const Table* t = tp.find_table("t");
  REQUIRE(t != nullptr);
  REQUIRE(t->entries.size() == 1);
  const Value& v = t->entries[0].second;
  REQUIRE(v.kind == Value::Kind::Str);
  // greedy longest-match over {aa, bb} plus the input side {a, b}
  CHECK(v.str == SymStr{"aa", "bb"});
}

TEST_CASE("minlen expressions evaluate") {
  Program p = parse(
      "dialect: srasp;\nsigma: a;\ngamma: a;\nio: padded;\nminlen: l * l + l + 1;\n"
      "out(i) = in(i);");
  REQUIRE(p.minlen.has_value());
  CHECK(p.minlen->eval(0) == 1);
  CHECK(p.minlen->eval(3) == 13);
  Program q = parse(
      "dialect: srasp;\nsigma: a;\ngamma: a;\nio: padded;\nminlen: max(l, 2 * l + 1);\n"
      "out(i) = in(i);");
  CHECK(q.minlen->eval(4) == 9);
}
