// Attention programs -> transducer pipelines. Scores are first rewritten to
// read position j only (one attention per profile of the score's i-reads,
// then a position-wise select). Each operation then becomes one stage over
// growing tuple alphabets: position-wise ops append a computed coordinate
// with a one-state machine, masked attentions become the default/latch
// machines, and unmasked attentions are split into strict halves first.

#include "rasp/lower.hpp"

#include "rasp/lang.hpp"

#include "lower_internal.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace rasp {

using detail::as_cell;
using detail::clone_def;
using detail::def_names;
using detail::fresh_name;
using detail::value_space;

namespace {

bool reads_var(const Expr& e, char v) {
  if (e.kind == Expr::Kind::Read && e.var == v) return true;
  if (e.index && reads_var(*e.index, v)) return true;
  for (auto& a : e.args)
    if (a && reads_var(*a, v)) return true;
  return false;
}

// ---- value spaces and tuple rendering -------------------------------------

std::string render_coord(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Bool: return v.b ? "1" : "0";
    case Value::Kind::Sym: return v.sym;
    case Value::Kind::Str: {
      if (v.str.empty()) return "ε";
      std::string r;
      for (size_t k = 0; k < v.str.size(); k++) {
        if (k) r += "·";
        r += v.str[k];
      }
      return r;
    }
    case Value::Kind::Nat: break;
  }
  throw std::logic_error("nat value in a tuple coordinate");
}

using Tuple = std::vector<Value>;

std::string render_tuple(const Tuple& t) {
  if (t.size() == 1) return render_coord(t[0]);
  std::string r = "⟨";
  for (size_t k = 0; k < t.size(); k++) {
    if (k) r += ",";
    r += render_coord(t[k]);
  }
  return r + "⟩";
}

// Tuple alphabets are kept sorted by rendered symbol for determinism.
using TupleSet = std::map<std::string, Tuple>;

// ---- expression evaluation over one position's tuple ----------------------

struct TupleEval {
  const TypedProgram& p;
  const std::map<std::string, int>& coord;

  Value table(const Table& t, std::vector<Value> args) const {
    for (size_t k = 0; k < args.size(); k++)
      if (t.arg_types.size() > k && t.arg_types[k].kind == SemType::Kind::Str)
        args[k] = as_cell(args[k]);
    for (auto& [keys, v] : t.entries)
      if (keys == args) return v;
    return *t.default_value;
  }

  Value ev(const Expr& e, const Tuple& t) const {
    switch (e.kind) {
      case Expr::Kind::BoolLit: return Value::mk_bool(e.bval);
      case Expr::Kind::SymLit: return Value::mk_sym(e.sym);
      case Expr::Kind::StrLit: return Value::mk_str(e.strv);
      case Expr::Kind::Read: return t[coord.at(e.name)];
      case Expr::Kind::Not: return Value::mk_bool(!ev(*e.args[0], t).b);
      case Expr::Kind::And:
        return Value::mk_bool(ev(*e.args[0], t).b && ev(*e.args[1], t).b);
      case Expr::Kind::Or:
        return Value::mk_bool(ev(*e.args[0], t).b || ev(*e.args[1], t).b);
      case Expr::Kind::IfElse:
        return ev(*e.args[1], t).b ? ev(*e.args[0], t) : ev(*e.args[2], t);
      case Expr::Kind::Cmp: {
        Value a = ev(*e.args[0], t), b = ev(*e.args[1], t);
        if (a.kind == Value::Kind::Str || b.kind == Value::Kind::Str) {
          a = as_cell(a);
          b = as_cell(b);
        }
        bool r = e.rel == Expr::Rel::Eq ? a == b : !(a == b);
        if (e.rel != Expr::Rel::Eq && e.rel != Expr::Rel::Ne)
          throw std::logic_error("ordered comparison in an attention program");
        return Value::mk_bool(r);
      }
      case Expr::Kind::Concat: {
        Value a = as_cell(ev(*e.args[0], t)), b = as_cell(ev(*e.args[1], t));
        SymStr s = a.str;
        s.insert(s.end(), b.str.begin(), b.str.end());
        return Value::mk_str(std::move(s));
      }
      case Expr::Kind::Apply: {
        std::vector<Value> args;
        for (auto& a : e.args) args.push_back(ev(*a, t));
        return table(*p.find_table(e.name), std::move(args));
      }
      case Expr::Kind::NatLit:
      case Expr::Kind::Add:
      case Expr::Kind::Sub:
        break;
    }
    throw std::logic_error("arithmetic in an attention program");
  }
};

// ---- name freshening and cloning helpers ----------------------------------

ExprPtr subst_var(const ExprPtr& e, char from, char to) {
  ExprPtr c = clone_expr(e);
  std::function<void(Expr&)> go = [&](Expr& x) {
    if (x.kind == Expr::Kind::Read && x.var == from) x.var = to;
    if (x.index) go(*x.index);
    for (auto& a : x.args)
      if (a) go(*a);
  };
  go(*c);
  return c;
}

// Replace every read of `name` at the given variable with a literal.
ExprPtr subst_read(const ExprPtr& e, const std::string& name, char var,
                   const ExprPtr& lit) {
  if (e->kind == Expr::Kind::Read && e->name == name && e->var == var)
    return clone_expr(lit);
  ExprPtr c = clone_expr(e);
  for (auto& a : c->args)
    if (a) a = subst_read(a, name, var, lit);
  return c;
}

Program strip_defs(const Program& p) {
  Program q = p;
  q.defs.clear();
  return q;
}

ExprPtr value_literal(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Bool: return mk_bool_lit(v.b);
    case Value::Kind::Sym: return mk_sym_lit(v.sym);
    case Value::Kind::Str: return mk_str_lit(v.str);
    case Value::Kind::Nat: break;
  }
  throw std::logic_error("nat literal in an attention program");
}

void collect_i_reads(const Expr& e, std::vector<const Expr*>& out) {
  if (e.kind == Expr::Kind::Read && e.var == 'i') {
    for (auto* r : out)
      if (r->name == e.name) return;
    out.push_back(&e);
    return;
  }
  for (auto& a : e.args)
    if (a) collect_i_reads(*a, out);
}

} // namespace

// ---- score normalization ---------------------------------------------------

TypedProgram normalize_scores(const TypedProgram& p) {
  std::set<std::string> used = def_names(p);
  Program q = strip_defs(p);
  for (auto& d : p.defs) {
    if (d.kind != Def::Kind::Attention || !reads_var(*d.attn.score, 'i')) {
      q.defs.push_back(clone_def(d));
      continue;
    }
    // Profile the score's i-reads: one attention per joint value assignment,
    // each with the reads replaced by that assignment's literals, then a
    // position-wise select keyed by which assignment holds at i. Profiles
    // are mutually exclusive and exhaustive by construction.
    std::vector<const Expr*> reads;
    collect_i_reads(*d.attn.score, reads);
    std::vector<std::vector<Value>> spaces;
    for (auto* r : reads) spaces.push_back(value_space(*r->type));
    std::vector<size_t> idx(reads.size(), 0);
    struct Profile {
      std::string def_name;
      ExprPtr guard;
    };
    std::vector<Profile> profiles;
    while (true) {
      ExprPtr score = clone_expr(d.attn.score);
      ExprPtr guard;
      for (size_t r = 0; r < reads.size(); r++) {
        const Value& v = spaces[r][idx[r]];
        score = subst_read(score, reads[r]->name, 'i', value_literal(v));
        ExprPtr atom;
        if (v.kind == Value::Kind::Bool) {
          atom = mk_read(reads[r]->name, 'i');
          if (!v.b) atom = mk_un(Expr::Kind::Not, atom);
        } else {
          atom = mk_cmp(Expr::Rel::Eq, mk_read(reads[r]->name, 'i'), value_literal(v));
        }
        guard = guard ? mk_bin(Expr::Kind::And, guard, atom) : atom;
      }
      Def a;
      a.kind = Def::Kind::Attention;
      a.name = fresh_name(used, d.name + "$p" + std::to_string(profiles.size()));
      a.attn.choice = d.attn.choice;
      a.attn.mask = d.attn.mask;
      a.attn.score = score;
      a.attn.value = clone_expr(d.attn.value);
      a.attn.default_value = clone_expr(d.attn.default_value);
      a.attn.default_omitted = d.attn.default_omitted;
      q.defs.push_back(a);
      profiles.push_back({a.name, guard});
      size_t r = 0;
      while (r < reads.size() && ++idx[r] == spaces[r].size()) idx[r++] = 0;
      if (r == reads.size()) break;
    }
    ExprPtr sel = mk_read(profiles.back().def_name, 'i');
    for (size_t k = profiles.size() - 1; k-- > 0;)
      sel = mk_ifelse(mk_read(profiles[k].def_name, 'i'), profiles[k].guard, sel);
    Def main;
    main.kind = Def::Kind::PositionWise;
    main.name = d.name;
    main.rhs = sel;
    q.defs.push_back(main);
  }
  return typecheck(q);
}

// ---- strictness rewrites ---------------------------------------------------

namespace {

// Rewrite non-strict masks and unmasked attentions into strict-mask forms:
// a j<=i (j>=i) attention also considers j=i, which a position-wise check of
// the score and value at i covers; an unmasked attention splits into the
// far-side strict attention, the at-i check, and the near-side strict
// attention that falls back to it.
Program strictify(const TypedProgram& p) {
  std::set<std::string> used = def_names(p);
  Program q = strip_defs(p);
  for (auto& d : p.defs) {
    if (d.kind != Def::Kind::Attention ||
        (d.attn.mask == MaskPred::Lt || d.attn.mask == MaskPred::Gt)) {
      q.defs.push_back(clone_def(d));
      continue;
    }
    ExprPtr score_i = subst_var(d.attn.score, 'j', 'i');
    ExprPtr value_i = subst_var(d.attn.value, 'j', 'i');
    bool left = d.attn.choice == Choice::Leftmost;
    if (d.attn.mask == MaskPred::Le || d.attn.mask == MaskPred::Ge) {
      MaskPred strict = d.attn.mask == MaskPred::Le ? MaskPred::Lt : MaskPred::Gt;
      // Position i is the first candidate scanned for leftmost/j>=i and
      // rightmost/j<=i, the last one for the other two pairings.
      bool at_i_wins = (d.attn.mask == MaskPred::Ge) == left;
      Def a = clone_def(d);
      a.attn.mask = strict;
      if (at_i_wins) {
        a.name = fresh_name(used, d.name + "$s");
        q.defs.push_back(a);
        Def main;
        main.kind = Def::Kind::PositionWise;
        main.name = d.name;
        main.rhs = mk_ifelse(value_i, score_i, mk_read(a.name, 'i'));
        q.defs.push_back(main);
      } else {
        a.attn.default_value = mk_ifelse(value_i, score_i, a.attn.default_value);
        a.attn.default_omitted = false;
        q.defs.push_back(a);
      }
      continue;
    }
    // Unmasked: far-side strict attention feeds the at-i check, which becomes
    // the default of the near-side strict attention.
    Def far = clone_def(d);
    far.name = fresh_name(used, d.name + "$r");
    far.attn.mask = left ? MaskPred::Gt : MaskPred::Lt;
    q.defs.push_back(far);
    Def at;
    at.kind = Def::Kind::PositionWise;
    at.name = fresh_name(used, d.name + "$c");
    at.rhs = mk_ifelse(value_i, score_i, mk_read(far.name, 'i'));
    q.defs.push_back(at);
    Def near = clone_def(d);
    near.attn.mask = left ? MaskPred::Lt : MaskPred::Gt;
    near.attn.default_value = mk_read(at.name, 'i');
    near.attn.default_omitted = false;
    q.defs.push_back(near);
  }
  return q;
}

// ---- per-operation machines ------------------------------------------------

std::vector<Sym> keys_of(const TupleSet& s) {
  std::vector<Sym> out;
  for (auto& [k, t] : s) out.push_back(k);
  return out;
}

Dft appender(const TupleSet& alpha, const std::function<Value(const Tuple&)>& f,
             TupleSet& next) {
  next.clear();
  Dft m;
  m.sigma = keys_of(alpha);
  m.nstates = 1;
  m.q0 = 0;
  m.delta.assign(1, {});
  for (auto& [sym, t] : alpha) {
    Tuple nt = t;
    nt.push_back(f(t));
    std::string ns = render_tuple(nt);
    next.emplace(ns, nt);
    m.delta[0].push_back(Dft::Edge{{ns}, 0});
  }
  m.delta_end.assign(1, Dft::Edge{{}, 0});
  m.gamma = keys_of(next);
  return m;
}

// The default/latch machine: state 0 appends the default and every state q_x
// appends x; a true score switches to the state of the value read there
// (latch = the first true score wins and later ones are ignored).
Dft attention_machine(const TupleSet& alpha, const std::vector<Value>& T,
                      const std::function<bool(const Tuple&)>& score,
                      const std::function<Value(const Tuple&)>& value,
                      const std::function<Value(const Tuple&)>& dflt, bool latch,
                      TupleSet& next) {
  next.clear();
  Dft m;
  m.sigma = keys_of(alpha);
  m.nstates = 1 + (int)T.size();
  m.q0 = 0;
  auto state_of = [&](const Value& v) {
    for (size_t k = 0; k < T.size(); k++)
      if (T[k] == v) return 1 + (int)k;
    throw std::logic_error("attention value outside the vector's value space");
  };
  m.delta.assign(m.nstates, {});
  for (auto& [sym, t] : alpha) {
    int sw = score(t) ? state_of(value(t)) : -1;
    Tuple dt = t;
    dt.push_back(dflt(t));
    std::string ds = render_tuple(dt);
    next.emplace(ds, dt);
    m.delta[0].push_back(Dft::Edge{{ds}, sw >= 0 ? sw : 0});
    for (size_t k = 0; k < T.size(); k++) {
      Tuple xt = t;
      xt.push_back(T[k]);
      std::string xs = render_tuple(xt);
      next.emplace(xs, xt);
      int stay = 1 + (int)k;
      m.delta[stay].push_back(Dft::Edge{{xs}, (latch || sw < 0) ? stay : sw});
    }
  }
  m.delta_end.assign(m.nstates, Dft::Edge{{}, 0});
  for (int qs = 0; qs < m.nstates; qs++) m.delta_end[qs].next = qs;
  m.gamma = keys_of(next);
  return m;
}

} // namespace

// ---- pipeline construction -------------------------------------------------

Pipeline brasp_to_pipeline(const TypedProgram& p0) {
  if (p0.dialect != Dialect::BRASP)
    throw std::runtime_error("only attention-dialect programs lower to pipelines");
  for (auto& d : p0.defs)
    if (d.kind == Def::Kind::Attention && reads_var(*d.attn.score, 'i'))
      throw UnnormalizedScore("score of '" + d.name +
                              "' reads position i; normalize scores first");
  TypedProgram p = typecheck(strictify(p0));

  Pipeline pl;
  std::map<std::string, int> coord;
  std::vector<std::string> names;
  coord["in"] = 0;
  names.push_back("in");
  TupleSet alpha;
  for (auto& a : p.in_alphabet()) alpha.emplace(a, Tuple{Value::mk_sym(a)});
  pl.stages.push_back(DirectedDft{identity_dft(keys_of(alpha)), Dir::L2R});

  TupleEval ev{p, coord};
  for (auto& d : p.defs) {
    if (d.kind == Def::Kind::PrefixSum)
      throw std::logic_error("prefix sum in an attention program");
    if (d.kind == Def::Kind::PositionWise && d.rhs->kind == Expr::Kind::Read &&
        d.rhs->offset == 0 && !d.rhs->index) {
      coord[d.name] = coord.at(d.rhs->name); // alias: reuse the coordinate
      continue;
    }
    // Canonicalize packed coordinates so tuple equality is value equality.
    bool cell = d.type->kind == SemType::Kind::Str;
    auto canon = [cell](Value v) { return cell ? as_cell(std::move(v)) : v; };
    TupleSet next;
    if (d.kind == Def::Kind::PositionWise) {
      Dft m = appender(
          alpha, [&](const Tuple& t) { return canon(ev.ev(*d.rhs, t)); }, next);
      pl.stages.push_back(DirectedDft{std::move(m), Dir::L2R});
    } else {
      std::vector<Value> T = value_space(*d.type);
      auto score = [&](const Tuple& t) { return ev.ev(*d.attn.score, t).b; };
      auto value = [&](const Tuple& t) { return canon(ev.ev(*d.attn.value, t)); };
      auto dflt = [&](const Tuple& t) {
        return canon(ev.ev(*d.attn.default_value, t));
      };
      bool future = d.attn.mask == MaskPred::Gt;
      bool left = d.attn.choice == Choice::Leftmost;
      // In a right-to-left pass the mask flips and leftmost/rightmost swap:
      // latch for leftmost j<i and rightmost j>i, reset otherwise.
      bool latch = left != future;
      Dft m = attention_machine(alpha, T, score, value, dflt, latch, next);
      pl.stages.push_back(DirectedDft{std::move(m), future ? Dir::R2L : Dir::L2R});
    }
    coord[d.name] = (int)names.size();
    names.push_back(d.name);
    alpha = std::move(next);
  }

  pl.final_coords = names;
  pl.out_coord = coord.at("out");
  for (auto& [sym, t] : alpha) pl.out_projection[sym] = show_value(t[pl.out_coord]);
  return pl;
}

PipelineAperiodicityReport check_pipeline_aperiodic(const Pipeline& pl) {
  PipelineAperiodicityReport rep;
  for (size_t k = 0; k < pl.stages.size(); k++) {
    AperiodicityReport r = is_aperiodic(pl.stages[k].machine);
    if (!r.aperiodic) {
      rep.all_aperiodic = false;
      rep.failures.push_back({(int)k, r});
    }
  }
  return rep;
}

} // namespace rasp
