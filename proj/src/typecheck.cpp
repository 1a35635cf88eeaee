#include "rasp/lang.hpp"
#include "internal.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace rasp {

std::set<char> free_vars(const Expr& e) {
  std::set<char> out;
  std::function<void(const Expr&)> go = [&](const Expr& x) {
    if (x.kind == Expr::Kind::Read) {
      if (x.index) go(*x.index); // subscript read: variables come from the index
      else out.insert(x.var);
      return;
    }
    for (auto& a : x.args) go(*a);
  };
  go(e);
  return out;
}

namespace detail {

void SymbolOrder::add(const Sym& s) {
  if (rank.count(s)) return;
  rank[s] = (int)all.size();
  all.push_back(s);
}

void SymbolOrder::sort(std::vector<Sym>& xs) const {
  std::sort(xs.begin(), xs.end(), [&](const Sym& a, const Sym& b) {
    auto ia = rank.find(a), ib = rank.find(b);
    int ra = ia == rank.end() ? (int)rank.size() : ia->second;
    int rb = ib == rank.end() ? (int)rank.size() : ib->second;
    if (ra != rb) return ra < rb;
    return a < b;
  });
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
}

std::vector<Sym> SymbolOrder::sorted_union(const std::vector<Sym>& a,
                                           const std::vector<Sym>& b) const {
  std::vector<Sym> u = a;
  u.insert(u.end(), b.begin(), b.end());
  sort(u);
  return u;
}

SymbolOrder symbol_order(const Program& p) {
  SymbolOrder o;
  for (auto& s : p.sigma) o.add(s);
  for (auto& s : p.gamma) o.add(s);
  o.add(PAD);
  o.add(ENDMARK);
  auto add_value = [&](const Value& v) {
    if (v.kind == Value::Kind::Sym) o.add(v.sym);
    if (v.kind == Value::Kind::Str)
      for (auto& s : v.str) o.add(s);
  };
  for (auto& t : p.tables) {
    for (auto& [keys, res] : t.entries) {
      for (auto& k : keys) add_value(k);
      add_value(res);
    }
    if (t.default_value) add_value(*t.default_value);
  }
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    if (x.kind == Expr::Kind::SymLit) o.add(x.sym);
    if (x.kind == Expr::Kind::StrLit)
      for (auto& s : x.strv) o.add(s);
    if (x.index) walk(*x.index);
    for (auto& a : x.args) walk(*a);
  };
  for (auto& d : p.defs) {
    if (d.rhs) walk(*d.rhs);
    if (d.attn.score) walk(*d.attn.score);
    if (d.attn.value) walk(*d.attn.value);
    if (d.attn.default_value) walk(*d.attn.default_value);
    if (d.psum.value) walk(*d.psum.value);
  }
  return o;
}

static SemType value_type(const Value& v, const SymbolOrder& order) {
  switch (v.kind) {
    case Value::Kind::Bool: return SemType::boolean();
    case Value::Kind::Nat: return SemType::nat();
    case Value::Kind::Sym: return SemType::sym({v.sym});
    case Value::Kind::Str: {
      std::vector<Sym> a(v.str.begin(), v.str.end());
      order.sort(a);
      return SemType::str(a, (int)v.str.size());
    }
  }
  return SemType::boolean();
}

// Coerce a single symbol to a length-1 packed cell (for concat and packed out).
static SemType as_str(const SemType& t) {
  if (t.kind == SemType::Kind::Sym) return SemType::str(t.alphabet, 1);
  return t;
}

static SemType unify_types(SemType a, SemType b, const SymbolOrder& order,
                           const std::string& def, const char* what) {
  // A single symbol unifies with packed cells as a length-1 cell.
  if (a.kind == SemType::Kind::Str || b.kind == SemType::Kind::Str) {
    a = as_str(a);
    b = as_str(b);
  }
  if (a.kind != b.kind)
    throw TypeError(def, std::string("ill-typed conditional arms: ") + what +
                             " mix different kinds");
  switch (a.kind) {
    case SemType::Kind::Sym: return SemType::sym(order.sorted_union(a.alphabet, b.alphabet));
    case SemType::Kind::Str:
      return SemType::str(order.sorted_union(a.alphabet, b.alphabet), std::max(a.k, b.k));
    default: return a;
  }
}

SemType lenient_type(const Program& p, const SymbolOrder& order,
                     const std::map<std::string, SemType>& env, const Expr& e) {
  auto rec = [&](const Expr& x) { return lenient_type(p, order, env, x); };
  switch (e.kind) {
    case Expr::Kind::BoolLit: return SemType::boolean();
    case Expr::Kind::NatLit: return SemType::nat();
    case Expr::Kind::SymLit: return SemType::sym({e.sym});
    case Expr::Kind::StrLit: {
      std::vector<Sym> a(e.strv.begin(), e.strv.end());
      order.sort(a);
      return SemType::str(a, (int)e.strv.size());
    }
    case Expr::Kind::Read: {
      if (e.name == "in") {
        auto a = p.in_alphabet();
        order.sort(a);
        return SemType::sym(a);
      }
      if (e.name == "pos") return SemType::nat();
      auto it = env.find(e.name);
      if (it == env.end())
        throw TypeError(e.name, "undefined vector '" + e.name + "'");
      return it->second;
    }
    case Expr::Kind::Not:
    case Expr::Kind::And:
    case Expr::Kind::Or:
    case Expr::Kind::Cmp: return SemType::boolean();
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return SemType::nat();
    case Expr::Kind::IfElse:
      return unify_types(rec(*e.args[0]), rec(*e.args[2]), order, "", "branches");
    case Expr::Kind::Concat: {
      SemType a = as_str(rec(*e.args[0])), b = as_str(rec(*e.args[1]));
      return SemType::str(order.sorted_union(a.alphabet, b.alphabet), a.k + b.k);
    }
    case Expr::Kind::Apply: {
      const Table* t = p.find_table(e.name);
      if (!t) throw TypeError(e.name, "unknown table '" + e.name + "'");
      SemType r = t->entries.empty() ? SemType::boolean()
                                     : value_type(t->entries[0].second, order);
      for (auto& [k, v] : t->entries)
        r = unify_types(r, value_type(v, order), order, "", "table results");
      if (t->default_value)
        r = unify_types(r, value_type(*t->default_value, order), order, "", "table results");
      return r;
    }
  }
  return SemType::boolean();
}

ExprPtr dead_value(const SemType& t) {
  switch (t.kind) {
    case SemType::Kind::Bool: return mk_bool_lit(false);
    case SemType::Kind::Nat: return mk_nat_lit(0);
    case SemType::Kind::Sym:
      return mk_sym_lit(t.alphabet.empty() ? PAD : t.alphabet[0]);
    case SemType::Kind::Str: return mk_str_lit({});
  }
  return mk_bool_lit(false);
}

} // namespace detail

namespace {

using detail::SymbolOrder;

struct Checker {
  TypedProgram& p;
  SymbolOrder order;
  std::map<std::string, SemType> env;
  std::string cur;   // def being checked (for error messages)
  int cur_index = 0; // its position in p.defs
  bool in_score = false;

  explicit Checker(TypedProgram& prog) : p(prog), order(detail::symbol_order(prog)) {}

  [[noreturn]] void fail(const std::string& reason) { throw TypeError(cur, reason); }

  void require_pos_dialect(const char* what) {
    if (p.dialect == Dialect::BRASP)
      fail(std::string("dialect feature violation: ") + what +
           " requires position arithmetic (brasp_pos or srasp)");
  }

  void check_fv(const Expr& e, const std::set<char>& allowed, const char* what) {
    for (char c : free_vars(e))
      if (!allowed.count(c))
        fail(std::string("free-variable violation: ") + what + " may not use '" +
             std::string(1, c) + "'");
  }

  SemType synth(Expr& e) {
    SemType t = synth_inner(e);
    if (t.kind == SemType::Kind::Sym || t.kind == SemType::Kind::Str)
      order.sort(t.alphabet);
    e.type = t;
    return t;
  }

  SemType synth_inner(Expr& e) {
    switch (e.kind) {
      case Expr::Kind::BoolLit: return SemType::boolean();
      case Expr::Kind::SymLit: return SemType::sym({e.sym});
      case Expr::Kind::NatLit:
        require_pos_dialect("a numeric literal");
        if (e.ival > 1) fail("numeric literals above 1 must be desugared into +1 chains");
        return SemType::nat();
      case Expr::Kind::StrLit: {
        std::vector<Sym> a(e.strv.begin(), e.strv.end());
        return SemType::str(a, (int)e.strv.size());
      }
      case Expr::Kind::Read: return synth_read(e);
      case Expr::Kind::Not: {
        if (synth(*e.args[0]).kind != SemType::Kind::Bool)
          fail("negation needs a boolean operand");
        return SemType::boolean();
      }
      case Expr::Kind::And:
      case Expr::Kind::Or: {
        for (auto& a : e.args)
          if (synth(*a).kind != SemType::Kind::Bool)
            fail("boolean connective needs boolean operands");
        return SemType::boolean();
      }
      case Expr::Kind::IfElse: {
        if (synth(*e.args[1]).kind != SemType::Kind::Bool)
          fail("conditional guard must be boolean");
        SemType a = synth(*e.args[0]), b = synth(*e.args[2]);
        return detail::unify_types(a, b, order, cur, "conditional branches");
      }
      case Expr::Kind::Cmp: return synth_cmp(e);
      case Expr::Kind::Add:
      case Expr::Kind::Sub: {
        require_pos_dialect("clipped arithmetic");
        if (synth(*e.args[0]).kind != SemType::Kind::Nat ||
            synth(*e.args[1]).kind != SemType::Kind::Nat)
          fail("clipped arithmetic needs numeric operands");
        return SemType::nat();
      }
      case Expr::Kind::Concat: {
        SemType a = detail::as_str(synth(*e.args[0]));
        SemType b = detail::as_str(synth(*e.args[1]));
        if (a.kind != SemType::Kind::Str || b.kind != SemType::Kind::Str)
          fail("concatenation needs packed-cell or symbol operands");
        return SemType::str(order.sorted_union(a.alphabet, b.alphabet), a.k + b.k);
      }
      case Expr::Kind::Apply: return synth_apply(e);
    }
    fail("unreachable expression kind");
  }

  SemType synth_read(Expr& e) {
    if (e.index || e.offset != 0)
      fail("subscript and neighbor reads must be desugared before typechecking");
    if (e.name == "in") {
      auto a = p.in_alphabet();
      return SemType::sym(a);
    }
    if (e.name == "pos") {
      require_pos_dialect("the position vector");
      return SemType::nat();
    }
    int idx = p.def_index(e.name);
    if (idx < 0 || idx >= cur_index)
      fail("undefined vector '" + e.name + "' (vectors must be defined before use)");
    return *p.defs[idx].type;
  }

  SemType synth_cmp(Expr& e) {
    SemType a = synth(*e.args[0]), b = synth(*e.args[1]);
    if (a.kind == SemType::Kind::Str || b.kind == SemType::Kind::Str) {
      a = detail::as_str(a);
      b = detail::as_str(b);
    }
    if (a.kind != b.kind) fail("comparison between different kinds");
    bool order_rel = e.rel == Expr::Rel::Lt || e.rel == Expr::Rel::Le ||
                     e.rel == Expr::Rel::Gt || e.rel == Expr::Rel::Ge;
    switch (a.kind) {
      case SemType::Kind::Bool:
        fail("booleans are combined with connectives, not compared");
      case SemType::Kind::Sym:
      case SemType::Kind::Str:
        if (order_rel) fail("symbols support only = and !=");
        return SemType::boolean();
      case SemType::Kind::Nat: {
        require_pos_dialect("a numeric comparison");
        auto fv = free_vars(e);
        if (order_rel && fv.size() > 1)
          fail("cross-position order comparison: an ordered numeric comparison "
               "may mention only one position variable");
        if (!order_rel && fv.size() > 1) {
          // Cross-position numeric tests are restricted to plain equality of reads.
          auto plain = [](const Expr& x) {
            return x.kind == Expr::Kind::Read && !x.index && x.offset == 0;
          };
          if (e.rel != Expr::Rel::Eq || !in_score || !plain(*e.args[0]) ||
              !plain(*e.args[1]))
            fail("cross-position numeric comparison must be a plain equality "
                 "of two vector reads inside an attention score");
        }
        return SemType::boolean();
      }
    }
    fail("unreachable comparison kind");
  }

  SemType synth_apply(Expr& e) {
    const Table* t = p.find_table(e.name);
    if (!t) fail("unknown table '" + e.name + "'");
    if (e.args.size() != t->arg_types.size())
      fail("table '" + e.name + "' expects " + std::to_string(t->arg_types.size()) +
           " argument(s)");
    std::vector<SemType> arg_ts;
    for (size_t k = 0; k < e.args.size(); k++) {
      SemType at = synth(*e.args[k]);
      if (t->arg_types[k].kind == SemType::Kind::Str) at = detail::as_str(at);
      if (at.kind != t->arg_types[k].kind)
        fail("table '" + e.name + "' argument " + std::to_string(k + 1) +
             " has the wrong kind");
      arg_ts.push_back(at);
    }
    if (!t->default_value) check_coverage(*t, arg_ts);
    return *t->result_type;
  }

  // Without a default the keys must cover every possible argument tuple.
  void check_coverage(const Table& t, const std::vector<SemType>& arg_ts) {
    std::vector<std::vector<Value>> cand;
    long total = 1;
    for (auto& at : arg_ts) {
      std::vector<Value> vs;
      switch (at.kind) {
        case SemType::Kind::Bool:
          vs = {Value::mk_bool(false), Value::mk_bool(true)};
          break;
        case SemType::Kind::Sym:
          for (auto& s : at.alphabet) vs.push_back(Value::mk_sym(s));
          break;
        case SemType::Kind::Str: {
          // All cells over the base alphabet up to the length bound.
          std::vector<SymStr> cur = {{}};
          vs.push_back(Value::mk_str({}));
          for (int len = 1; len <= at.k; len++) {
            std::vector<SymStr> next;
            for (auto& w : cur)
              for (auto& s : at.alphabet) {
                SymStr x = w;
                x.push_back(s);
                next.push_back(x);
                vs.push_back(Value::mk_str(x));
              }
            cur = std::move(next);
          }
          break;
        }
        case SemType::Kind::Nat:
          fail("table '" + t.name + "' has numeric keys and needs a default entry");
      }
      if (vs.empty()) return; // empty domain: vacuously covered
      total *= (long)vs.size();
      if (total > 4096)
        fail("table '" + t.name + "' lacks a default and its argument domain is too "
             "large to check for coverage");
      cand.push_back(std::move(vs));
    }
    std::set<std::vector<Value>> keys;
    for (auto& [k, v] : t.entries) keys.insert(k);
    std::vector<Value> tuple(cand.size());
    std::function<void(size_t)> go = [&](size_t k) {
      if (k == cand.size()) {
        if (!keys.count(tuple))
          fail("table '" + t.name + "' lacks a default and does not cover its "
               "argument domain");
        return;
      }
      for (auto& v : cand[k]) {
        tuple[k] = v;
        go(k + 1);
      }
    };
    go(0);
  }

  void type_tables() {
    for (auto& t : p.tables) {
      if (t.entries.empty()) throw TypeError(t.name, "table has no entries");
      size_t arity = t.entries[0].first.size();
      t.arg_types.assign(arity, SemType::boolean());
      std::vector<bool> seen(arity, false);
      for (auto& [keys, res] : t.entries) {
        if (keys.size() != arity)
          throw TypeError(t.name, "table keys have inconsistent arity");
        for (size_t k = 0; k < arity; k++) {
          SemType kt = detail::value_type(keys[k], order);
          if (!seen[k]) {
            t.arg_types[k] = kt;
            seen[k] = true;
          } else if (t.arg_types[k].kind != kt.kind) {
            throw TypeError(t.name, "table key column " + std::to_string(k + 1) +
                                        " mixes kinds");
          } else {
            t.arg_types[k] = detail::unify_types(t.arg_types[k], kt, order, t.name,
                                                 "table keys");
          }
        }
      }
      SemType rt = detail::value_type(t.entries[0].second, order);
      for (auto& [keys, res] : t.entries)
        rt = detail::unify_types(rt, detail::value_type(res, order), order, t.name,
                                 "table results");
      if (t.default_value)
        rt = detail::unify_types(rt, detail::value_type(*t.default_value, order),
                                 order, t.name, "table results");
      if (rt.kind == SemType::Kind::Sym || rt.kind == SemType::Kind::Str)
        order.sort(rt.alphabet);
      t.result_type = rt;
    }
  }

  void check_def(Def& d) {
    cur = d.name;
    switch (d.kind) {
      case Def::Kind::PositionWise: {
        check_fv(*d.rhs, {d.var}, "a position-wise definition");
        d.type = synth(*d.rhs);
        break;
      }
      case Def::Kind::Attention: {
        check_fv(*d.attn.score, {'i', 'j'}, "an attention score");
        check_fv(*d.attn.value, {'j'}, "an attention value");
        if (!d.attn.default_value)
          fail("missing attention default (run desugar first)");
        check_fv(*d.attn.default_value, {'i'}, "an attention default");
        in_score = true;
        SemType st = synth(*d.attn.score);
        in_score = false;
        if (st.kind != SemType::Kind::Bool) fail("attention score must be boolean");
        SemType vt = synth(*d.attn.value);
        SemType dt = synth(*d.attn.default_value);
        d.type = detail::unify_types(vt, dt, order, cur,
                                     "attention value and default");
        break;
      }
      case Def::Kind::PrefixSum: {
        if (p.dialect != Dialect::SRASP)
          fail("dialect feature violation: prefix sums require srasp");
        check_fv(*d.psum.value, {'j'}, "a prefix-sum value");
        if (synth(*d.psum.value).kind != SemType::Kind::Nat)
          fail("prefix-sum value must be numeric");
        d.type = SemType::nat();
        break;
      }
    }
    if (d.type && (d.type->kind == SemType::Kind::Sym || d.type->kind == SemType::Kind::Str))
      order.sort(d.type->alphabet);
  }

  void check_out() {
    const Def* out = p.find_def("out");
    if (!out) throw TypeError("out", "program defines no out vector");
    const SemType& t = *out->type;
    auto gamma = p.out_alphabet();
    order.sort(gamma);
    auto subset = [&](const std::vector<Sym>& a) {
      for (auto& s : a)
        if (std::find(gamma.begin(), gamma.end(), s) == gamma.end()) return false;
      return true;
    };
    cur = "out";
    switch (p.convention) {
      case Convention::LengthPreserving:
        if (t.kind != SemType::Kind::Sym) fail("out must produce single symbols");
        if (!subset(t.alphabet)) fail("out can produce symbols outside the output alphabet");
        break;
      case Convention::PackedOutput: {
        SemType s = detail::as_str(t);
        if (s.kind != SemType::Kind::Str) fail("out must produce packed cells");
        if (!subset(s.alphabet)) fail("out can produce symbols outside the output alphabet");
        if (s.k > p.packed_k)
          fail("out cells can exceed the declared packing bound");
        break;
      }
      case Convention::Padded:
        if (t.kind != SemType::Kind::Sym) fail("out must produce single symbols");
        if (!subset(t.alphabet))
          fail("out can produce symbols outside the padded output alphabet");
        break;
    }
  }

  void run() {
    type_tables();
    std::set<std::string> names;
    for (size_t k = 0; k < p.defs.size(); k++) {
      Def& d = p.defs[k];
      if (d.name == "in" || d.name == "pos")
        throw TypeError(d.name, "cannot redefine the predefined vector '" + d.name + "'");
      if (!names.insert(d.name).second)
        throw TypeError(d.name, "duplicate definition of '" + d.name + "'");
      cur_index = (int)k;
      check_def(d);
      env[d.name] = *d.type;
    }
    check_out();
  }
};

} // namespace

TypedProgram typecheck(const Program& p) {
  TypedProgram tp;
  static_cast<Program&>(tp) = p;
  Checker c(tp);
  c.run();
  return tp;
}

TypedProgram load_program(const std::string& path) {
  return typecheck(desugar(parse_file(path)));
}

TypedProgram load_program_text(const std::string& text, const std::string& name) {
  return typecheck(desugar(parse(text, name)));
}

} // namespace rasp
