// Composing an identity-reset cascade onto a program with packed outputs.
// Each two-state stage becomes three appended definitions: a state vector
// (which state the stage's machine is in when it reaches position i's cell,
// recovered from the nearest reset symbol), an end-marked copy of the cell at
// the boundary position, and the output cell, obtained by table lookup of the
// machine's run over the cell from either state.

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

// Tokens act on a two-state machine as the identity or as a constant; pick
// the classification apart per input symbol.
struct TokenKind {
  bool reset = false;
  int target = 0; // reset target state
};

std::vector<TokenKind> classify(const Dft& m) {
  std::vector<TokenKind> kinds(m.sigma.size());
  for (size_t a = 0; a < m.sigma.size(); a++) {
    bool ident = true, constant = true;
    for (int q = 0; q < m.nstates; q++) {
      if (m.delta[q][a].next != q) ident = false;
      if (m.delta[q][a].next != m.delta[0][a].next) constant = false;
    }
    if (!ident && constant) kinds[a] = {true, m.delta[0][a].next};
  }
  return kinds;
}

// Run the machine over one cell's tokens starting from `q`; `endmarked`
// appends the end-marker transition's output. A backward stage scans the
// cell's tokens reversed and its emissions land reversed in the final
// string, end-marker output first.
SymStr run_cell(const Dft& m, int q, const SymStr& cell, bool endmarked, Dir dir) {
  SymStr toks = cell;
  if (dir == Dir::R2L) std::reverse(toks.begin(), toks.end());
  SymStr out;
  for (auto& a : toks) {
    int k = m.sym_index(a);
    if (k < 0)
      throw std::runtime_error("cell symbol '" + a +
                               "' is not in the cascade stage's input alphabet");
    out.insert(out.end(), m.delta[q][k].out.begin(), m.delta[q][k].out.end());
    q = m.delta[q][k].next;
  }
  if (endmarked)
    out.insert(out.end(), m.delta_end[q].out.begin(), m.delta_end[q].out.end());
  if (dir == Dir::R2L) std::reverse(out.begin(), out.end());
  return out;
}

ExprPtr apply1(const std::string& table, const std::string& vec, char var) {
  return mk_apply(table, {mk_read(vec, var)});
}

} // namespace

TypedProgram cascade_to_brasp(const TypedProgram& base, const Cascade& c) {
  if (base.convention != Convention::PackedOutput)
    throw std::runtime_error("cascade composition needs a base with packed outputs");
  for (size_t k = 0; k < c.stages.size(); k++) {
    const Dft& m = c.stages[k].machine;
    if (m.nstates > 2 || !is_identity_reset(m)) throw NotIdentityReset((int)k);
  }

  Program prog = base;
  for (auto& d : prog.defs) d = detail::clone_def(d); // renames mutate in place
  std::set<std::string> used = detail::def_names(prog);
  std::string cur = fresh_name(used, "z$0");
  for (auto& d : prog.defs) {
    if (d.name == "out") d.name = cur;
    rename_reads(d, "out", cur);
  }
  std::string boundary_l2r, boundary_r2l; // shared last/first-position flags

  for (size_t k = 0; k < c.stages.size(); k++) {
    const Dft& m = c.stages[k].machine;
    Dir dir = c.stages[k].dir;
    std::vector<TokenKind> kinds = classify(m);
    // Recover the current output's cell type; restate it as the program's
    // output while the real out vector is still under construction.
    Program probe = prog;
    Def alias;
    alias.kind = Def::Kind::PositionWise;
    alias.name = "out";
    alias.rhs = mk_read(cur, 'i');
    probe.defs.push_back(alias);
    TypedProgram acc = typecheck(probe);
    SemType cell_t = *acc.find_def(cur)->type;
    std::vector<Value> cells = value_space(cell_t);

    // Boundary flag: the position whose cell absorbs the end-marker — the
    // last position for a forward stage, the first for a backward one.
    std::string* boundary = dir == Dir::L2R ? &boundary_l2r : &boundary_r2l;
    if (boundary->empty()) {
      *boundary = fresh_name(used, dir == Dir::L2R ? "islast" : "isfirst");
      Def b;
      b.kind = Def::Kind::Attention;
      b.name = *boundary;
      b.attn.choice = dir == Dir::L2R ? Choice::Leftmost : Choice::Rightmost;
      b.attn.mask = dir == Dir::L2R ? MaskPred::Gt : MaskPred::Lt;
      b.attn.score = mk_bool_lit(true);
      b.attn.value = mk_bool_lit(false);
      b.attn.default_value = mk_bool_lit(true);
      prog.defs.push_back(b);
    }

    std::string sk = std::to_string(k);
    std::string isreset = fresh_name(used, "isreset$" + sk);
    std::string to1 = fresh_name(used, "to1$" + sk);
    std::string run1 = fresh_name(used, "run1$" + sk);
    std::string run2 = fresh_name(used, "run2$" + sk);
    std::string st = fresh_name(used, "st$" + sk);
    std::string sym = fresh_name(used, "sym$" + sk);
    std::string znext = k + 1 == c.stages.size() ? "out" : fresh_name(used, "z$" + std::to_string(k + 1));

    // A forward stage's state at cell i is set by the last reset symbol in
    // the nearest resetting cell to the left; a backward stage scans cells
    // right to left and tokens within a cell reversed, so the first reset
    // symbol in the nearest resetting cell to the right decides.
    Table treset{isreset, {}, Value::mk_bool(false), {}, {}};
    Table tto1{to1, {}, Value::mk_bool(false), {}, {}};
    Table trun1{run1, {}, Value::mk_str({}), {}, {}};
    Table trun2{run2, {}, Value::mk_str({}), {}, {}};
    int out_k = 1;
    for (auto& cv : cells) {
      SymStr cell = as_cell(cv).str;
      const TokenKind* hit = nullptr;
      for (auto& a : cell) {
        int idx = m.sym_index(a);
        if (idx < 0)
          throw std::runtime_error("cell symbol '" + a +
                                   "' is not in the cascade stage's input alphabet");
        const TokenKind& tk = kinds[idx];
        if (!tk.reset) continue;
        if (dir == Dir::L2R || !hit) hit = &tk; // last for forward, first for backward
      }
      Value key = Value::mk_str(cell);
      if (hit) {
        treset.entries.push_back({{key}, Value::mk_bool(true)});
        tto1.entries.push_back({{key}, Value::mk_bool(hit->target == m.q0)});
      }
      for (bool marked : {false, true}) {
        SymStr mk = cell;
        if (marked) {
          if (dir == Dir::L2R)
            mk.push_back(ENDMARK);
          else
            mk.insert(mk.begin(), ENDMARK);
        }
        SymStr o1 = run_cell(m, m.q0, cell, marked, dir);
        out_k = std::max(out_k, (int)o1.size());
        trun1.entries.push_back({{Value::mk_str(mk)}, Value::mk_str(o1)});
        if (m.nstates > 1) {
          SymStr o2 = run_cell(m, 1 - m.q0, cell, marked, dir);
          out_k = std::max(out_k, (int)o2.size());
          trun2.entries.push_back({{Value::mk_str(mk)}, Value::mk_str(o2)});
        } else {
          trun2.entries.push_back({{Value::mk_str(mk)}, Value::mk_str(o1)});
        }
      }
    }
    prog.tables.push_back(trun1);
    prog.tables.push_back(trun2);

    Def dst;
    dst.name = st;
    if (treset.entries.empty()) {
      // no cell resets the machine, so it stays in its start state
      dst.kind = Def::Kind::PositionWise;
      dst.rhs = mk_bool_lit(true);
    } else {
      prog.tables.push_back(treset);
      prog.tables.push_back(tto1);
      dst.kind = Def::Kind::Attention;
      dst.attn.choice = dir == Dir::L2R ? Choice::Rightmost : Choice::Leftmost;
      dst.attn.mask = dir == Dir::L2R ? MaskPred::Lt : MaskPred::Gt;
      dst.attn.score = apply1(isreset, cur, 'j');
      dst.attn.value = apply1(to1, cur, 'j');
      dst.attn.default_value = mk_bool_lit(true);
    }
    prog.defs.push_back(dst);

    Def dsym;
    dsym.kind = Def::Kind::PositionWise;
    dsym.name = sym;
    ExprPtr markd = dir == Dir::L2R
                        ? mk_bin(Expr::Kind::Concat, mk_read(cur, 'i'), mk_sym_lit(ENDMARK))
                        : mk_bin(Expr::Kind::Concat, mk_sym_lit(ENDMARK), mk_read(cur, 'i'));
    dsym.rhs = mk_ifelse(markd, mk_read(*boundary, 'i'), mk_read(cur, 'i'));
    prog.defs.push_back(dsym);

    Def dout;
    dout.kind = Def::Kind::PositionWise;
    dout.name = znext;
    dout.rhs = mk_ifelse(apply1(run1, sym, 'i'), mk_read(st, 'i'), apply1(run2, sym, 'i'));
    prog.defs.push_back(dout);

    prog.gamma = m.gamma;
    prog.packed_k = out_k;
    cur = znext;
  }
  return typecheck(prog);
}

TypedProgram arational_to_brasp(const DirectedDft& fL, const DirectedDft& fR,
                                const Cascade& cL, const Cascade& cR) {
  auto check = [](const DirectedDft& f, const Cascade& c, const char* which) {
    Pipeline pl;
    pl.stages = c.stages;
    std::vector<SymStr> words{{}};
    for (size_t head = 0; head < words.size(); head++) {
      SymStr w = words[head];
      if ((int)w.size() < 6)
        for (auto& a : f.machine.sigma) {
          w.push_back(a);
          words.push_back(w);
          w.pop_back();
        }
      SymStr direct = run_directed(f, words[head]);
      bool agree = false;
      try {
        agree = run_pipeline(pl, words[head]) == direct;
      } catch (const std::exception&) {
        // a cascade that cannot even run the word certainly disagrees
      }
      if (!agree) {
        std::string ws;
        for (auto& a : words[head]) ws += a;
        throw CascadeMismatch(std::string("the ") + which +
                              " cascade disagrees with its machine on \"" + ws + "\"");
      }
    }
  };
  check(fL, cL, "forward");
  check(fR, cR, "backward");

  Program packer;
  packer.dialect = Dialect::BRASP;
  packer.convention = Convention::PackedOutput;
  packer.packed_k = 1;
  packer.sigma = fL.machine.sigma;
  packer.gamma = fL.machine.sigma;
  packer.name = "arational";
  Def d;
  d.kind = Def::Kind::PositionWise;
  d.name = "out";
  d.rhs = mk_read("in", 'i');
  packer.defs.push_back(d);

  Cascade both;
  both.stages = cL.stages;
  both.stages.insert(both.stages.end(), cR.stages.begin(), cR.stages.end());
  return cascade_to_brasp(typecheck(packer), both);
}

} // namespace rasp
