#pragma once
// Helpers shared by the lowering passes: finite value spaces, cell
// canonicalization, name freshening and read renaming.

#include "rasp/ast.hpp"

#include <algorithm>
#include <set>

namespace rasp::detail {

inline void enum_strs(const std::vector<Sym>& alpha, int k, SymStr& cur,
                      std::vector<Value>& out) {
  out.push_back(Value::mk_str(cur));
  if ((int)cur.size() == k) return;
  for (auto& a : alpha) {
    cur.push_back(a);
    enum_strs(alpha, k, cur, out);
    cur.pop_back();
  }
}

// All values of a finite type, deterministically ordered (strings by length
// first, then alphabet order).
inline std::vector<Value> value_space(const SemType& t) {
  std::vector<Value> out;
  switch (t.kind) {
    case SemType::Kind::Bool:
      out = {Value::mk_bool(false), Value::mk_bool(true)};
      break;
    case SemType::Kind::Sym:
      for (auto& a : t.alphabet) out.push_back(Value::mk_sym(a));
      break;
    case SemType::Kind::Str: {
      SymStr cur;
      enum_strs(t.alphabet, t.k, cur, out);
      std::stable_sort(out.begin(), out.end(), [](const Value& a, const Value& b) {
        return a.str.size() < b.str.size();
      });
      break;
    }
    case SemType::Kind::Nat:
      throw std::logic_error("a numeric vector has no finite value space");
  }
  return out;
}

inline Value as_cell(const Value& v) {
  if (v.kind == Value::Kind::Sym) return Value::mk_str({v.sym});
  return v;
}

inline std::string fresh_name(std::set<std::string>& used, const std::string& base) {
  std::string n = base;
  int k = 2;
  while (used.count(n)) n = base + std::to_string(k++);
  used.insert(n);
  return n;
}

inline std::set<std::string> def_names(const Program& p) {
  std::set<std::string> used{"in", "pos", "out"};
  for (auto& d : p.defs) used.insert(d.name);
  for (auto& t : p.tables) used.insert(t.name);
  return used;
}

inline Def clone_def(const Def& d) {
  Def c = d;
  if (c.rhs) c.rhs = clone_expr(c.rhs);
  if (c.attn.score) c.attn.score = clone_expr(c.attn.score);
  if (c.attn.value) c.attn.value = clone_expr(c.attn.value);
  if (c.attn.default_value) c.attn.default_value = clone_expr(c.attn.default_value);
  if (c.psum.value) c.psum.value = clone_expr(c.psum.value);
  return c;
}

// Rename every read of `from` to `to`, in place.
inline void rename_reads(Expr& e, const std::string& from, const std::string& to) {
  if (e.kind == Expr::Kind::Read && e.name == from) e.name = to;
  if (e.index) rename_reads(*e.index, from, to);
  for (auto& a : e.args)
    if (a) rename_reads(*a, from, to);
}

inline void rename_reads(Def& d, const std::string& from, const std::string& to) {
  if (d.rhs) rename_reads(*d.rhs, from, to);
  if (d.attn.score) rename_reads(*d.attn.score, from, to);
  if (d.attn.value) rename_reads(*d.attn.value, from, to);
  if (d.attn.default_value) rename_reads(*d.attn.default_value, from, to);
  if (d.psum.value) rename_reads(*d.psum.value, from, to);
}

} // namespace rasp::detail
