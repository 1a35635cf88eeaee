// Padded-program constructions: composition of two padded programs,
// string homomorphisms, and unpacking of packed outputs.

#include "rasp/lower.hpp"

#include "rasp/lang.hpp"

#include "lower_internal.hpp"

#include <algorithm>

namespace rasp {

using detail::as_cell;
using detail::fresh_name;
using detail::rename_reads;
using detail::value_space;

namespace {

ExprPtr R(const std::string& v) { return mk_read(v, 'i'); }
ExprPtr Rj(const std::string& v) { return mk_read(v, 'j'); }

void rename_applies(Expr& e, const std::string& from, const std::string& to) {
  if (e.kind == Expr::Kind::Apply && e.name == from) e.name = to;
  if (e.index) rename_applies(*e.index, from, to);
  for (auto& a : e.args) rename_applies(*a, from, to);
}

void rename_applies(Def& d, const std::string& from, const std::string& to) {
  if (d.rhs) rename_applies(*d.rhs, from, to);
  if (d.attn.score) rename_applies(*d.attn.score, from, to);
  if (d.attn.value) rename_applies(*d.attn.value, from, to);
  if (d.attn.default_value) rename_applies(*d.attn.default_value, from, to);
  if (d.psum.value) rename_applies(*d.psum.value, from, to);
}

} // namespace

TypedProgram srasp_compose(const TypedProgram& p1, const TypedProgram& p2) {
  if (p1.convention != Convention::Padded || p2.convention != Convention::Padded)
    throw std::runtime_error("padded composition needs two padded programs");
  if (p1.gamma != p2.sigma)
    throw std::runtime_error(
        "padded composition needs the first program's output alphabet to be "
        "the second's input alphabet");

  // Renames mutate expressions in place, and p1/p2 may be the same program,
  // so both def blocks are deep-cloned first.
  Program prog = p1;
  for (auto& d : prog.defs) d = detail::clone_def(d);
  prog.dialect = Dialect::SRASP;
  prog.name = p1.name.empty() ? p2.name : p1.name + "." + p2.name;
  std::set<std::string> used = detail::def_names(prog);
  std::string z = fresh_name(used, "z$");
  for (auto& d : prog.defs) {
    if (d.name == "out") d.name = z;
    rename_reads(d, "out", z);
  }

  // Splice in the second program, prefixing any name it shares with the
  // first and feeding its input from the first's output.
  std::string stem = (p2.name.empty() ? "q" : p2.name) + "$";
  std::vector<Def> incoming;
  for (auto& d : p2.defs) incoming.push_back(detail::clone_def(d));
  std::vector<Table> tables2 = p2.tables;
  auto resolve = [&](const std::string& name) {
    std::string renamed = name;
    if (used.count(renamed)) renamed = stem + renamed;
    while (used.count(renamed)) renamed += "$";
    used.insert(renamed);
    return renamed;
  };
  for (auto& t : tables2) {
    std::string renamed = resolve(t.name);
    if (renamed != t.name) {
      for (auto& d : incoming) rename_applies(d, t.name, renamed);
      t.name = renamed;
    }
  }
  for (size_t k = 0; k < incoming.size(); k++) {
    std::string name = incoming[k].name;
    if (name == "out") continue;
    std::string renamed = resolve(name);
    if (renamed != name) {
      incoming[k].name = renamed;
      for (auto& d : incoming) rename_reads(d, name, renamed);
    }
  }
  for (auto& d : incoming) rename_reads(d, "in", z);
  for (auto& d : incoming) {
    d.type.reset();
    prog.defs.push_back(std::move(d));
  }
  for (auto& t : tables2) prog.tables.push_back(std::move(t));

  prog.sigma = p1.sigma;
  prog.gamma = p2.gamma;
  MinLen q1 = p1.minlen ? *p1.minlen : MinLen::var();
  MinLen q2 = p2.minlen ? *p2.minlen : MinLen::var();
  prog.minlen = MinLen::max_(q1, MinLen::substitute(q2, q1));
  return typecheck(prog);
}

TypedProgram hom_to_srasp(const std::map<Sym, SymStr>& h,
                          const std::vector<Sym>& sigma,
                          const std::vector<Sym>& gamma,
                          const std::string& name) {
  int K = 0;
  for (auto& a : sigma) {
    auto it = h.find(a);
    if (it == h.end())
      throw std::runtime_error("homomorphism is not defined on symbol '" + a + "'");
    K = std::max(K, (int)it->second.size());
    for (auto& g : it->second)
      if (std::find(gamma.begin(), gamma.end(), g) == gamma.end())
        throw std::runtime_error("homomorphism image symbol '" + g +
                                 "' is not in the output alphabet");
  }

  Program prog;
  prog.dialect = Dialect::SRASP;
  prog.convention = Convention::Padded;
  prog.sigma = sigma;
  prog.gamma = gamma;
  prog.name = name;
  prog.minlen = MinLen::mul(MinLen::lit_(K), MinLen::var());

  auto pw = [&](const std::string& n, ExprPtr rhs) {
    Def d;
    d.kind = Def::Kind::PositionWise;
    d.name = n;
    d.rhs = std::move(rhs);
    prog.defs.push_back(std::move(d));
  };

  if (K == 0) { // everything maps to the empty string
    pw("out", mk_sym_lit(PAD));
    return typecheck(desugar(prog));
  }

  // Image lengths, their prefix sums, and each image's start offset.
  ExprPtr lens = mk_nat_lit(0);
  for (auto it = sigma.rbegin(); it != sigma.rend(); ++it) {
    int len = (int)h.at(*it).size();
    if (len == 0) continue;
    lens = mk_ifelse(mk_nat_lit(len),
                     mk_cmp(Expr::Rel::Eq, R("in"), mk_sym_lit(*it)),
                     std::move(lens));
  }
  pw("lens", std::move(lens));
  {
    Def d;
    d.kind = Def::Kind::PrefixSum;
    d.name = "ends";
    d.psum.value = Rj("lens");
    prog.defs.push_back(std::move(d));
  }
  pw("starts", mk_bin(Expr::Kind::Sub, R("ends"), R("lens")));

  // sym0 holds, at each output position that starts an image, the input
  // symbol whose image starts there; symk shifts it right k places.
  {
    Def d;
    d.kind = Def::Kind::Attention;
    d.name = "sym0";
    d.attn.choice = Choice::Rightmost;
    d.attn.mask = MaskPred::None;
    d.attn.score = mk_cmp(Expr::Rel::Eq, mk_read("pos", 'i'), mk_read("starts", 'j'));
    d.attn.value = Rj("in");
    d.attn.default_value = mk_sym_lit(PAD);
    prog.defs.push_back(std::move(d));
  }
  for (int k = 1; k < K; k++) {
    Def d;
    d.kind = Def::Kind::Attention;
    d.name = "sym" + std::to_string(k);
    d.attn.choice = Choice::Rightmost;
    d.attn.mask = MaskPred::Lt;
    d.attn.score = mk_bool_lit(true);
    d.attn.value = Rj("sym" + std::to_string(k - 1));
    d.attn.default_value = mk_sym_lit(PAD);
    prog.defs.push_back(std::move(d));
  }

  // Output position i holds symbol g iff some symk(i) = a with h(a)_k = g.
  ExprPtr out = mk_sym_lit(PAD);
  for (auto it = gamma.rbegin(); it != gamma.rend(); ++it) {
    ExprPtr any;
    for (auto& a : sigma) {
      const SymStr& img = h.at(a);
      for (int k = 0; k < (int)img.size(); k++) {
        if (img[k] != *it) continue;
        ExprPtr hit = mk_cmp(Expr::Rel::Eq, R("sym" + std::to_string(k)),
                             mk_sym_lit(a));
        any = any ? mk_bin(Expr::Kind::Or, std::move(any), std::move(hit))
                  : std::move(hit);
      }
    }
    if (any)
      out = mk_ifelse(mk_sym_lit(*it), std::move(any), std::move(out));
  }
  pw("out", std::move(out));
  return typecheck(desugar(prog));
}

namespace {

// View a packed program as a padded one over its cell alphabet: attentions
// and prefix sums are made blind to pad positions, and the output is the
// rendered cell at real positions, pad elsewhere. Sound as long as the base
// never relies on addition/subtraction saturating at the top of the range,
// since under padding the ceiling moves from l-1 to n-1; the packed corpus
// programs and the segment-composition blocks only ever consume indices
// inside the real range, so the guards restore their behaviour exactly.
TypedProgram padify(const TypedProgram& p) {
  if (p.convention != Convention::PackedOutput)
    throw std::runtime_error("only packed programs can be unpacked");
  SemType cell_t = *p.find_def("out")->type;

  Program prog = p;
  for (auto& d : prog.defs) d = detail::clone_def(d);
  prog.dialect = Dialect::SRASP;
  prog.convention = Convention::Padded;
  prog.packed_k = 0;
  prog.minlen = MinLen::var();
  std::set<std::string> used = detail::def_names(prog);
  std::string z = fresh_name(used, "cell$");
  for (auto& d : prog.defs) {
    if (d.name == "out") d.name = z;
    rename_reads(d, "out", z);
    d.type.reset();
  }

  ExprPtr live = mk_un(Expr::Kind::Not,
                       mk_cmp(Expr::Rel::Eq, Rj("in"), mk_sym_lit(PAD)));
  for (auto& d : prog.defs) {
    if (d.kind == Def::Kind::Attention)
      d.attn.score = mk_bin(Expr::Kind::And, clone_expr(d.attn.score),
                            clone_expr(live));
    else if (d.kind == Def::Kind::PrefixSum)
      d.psum.value = mk_ifelse(clone_expr(d.psum.value), clone_expr(live),
                               mk_nat_lit(0));
  }

  // Render each cell as one symbol of the padded output alphabet.
  std::string rend = fresh_name(used, "rend$");
  Table t{rend, {}, Value::mk_sym(PAD), {}, {}};
  std::vector<Sym> delta;
  for (auto& cv : value_space(cell_t)) {
    Sym s = show_value(cv);
    if (std::find(delta.begin(), delta.end(), s) != delta.end())
      throw std::runtime_error("packed cells do not render to distinct symbols");
    delta.push_back(s);
    t.entries.push_back({{as_cell(cv)}, Value::mk_sym(s)});
  }
  prog.tables.push_back(std::move(t));
  prog.gamma = delta;

  Def dout;
  dout.kind = Def::Kind::PositionWise;
  dout.name = "out";
  dout.rhs = mk_ifelse(mk_sym_lit(PAD),
                       mk_cmp(Expr::Rel::Eq, R("in"), mk_sym_lit(PAD)),
                       mk_apply(rend, {R(z)}));
  prog.defs.push_back(std::move(dout));
  return typecheck(prog);
}

} // namespace

TypedProgram unpack_packed(const TypedProgram& p) {
  TypedProgram padded = padify(p);
  SemType cell_t = *p.find_def("out")->type;
  std::map<Sym, SymStr> h;
  std::vector<Sym> delta;
  for (auto& cv : value_space(cell_t)) {
    Sym s = show_value(cv);
    delta.push_back(s);
    h[s] = as_cell(cv).str;
  }
  TypedProgram hom = hom_to_srasp(h, delta, p.gamma, "unpack");
  return srasp_compose(padded, hom);
}

} // namespace rasp
