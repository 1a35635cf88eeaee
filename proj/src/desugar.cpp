#include "rasp/lang.hpp"
#include "internal.hpp"

#include <functional>

namespace rasp {

namespace {

using detail::SymbolOrder;

ExprPtr subst_var(const ExprPtr& e, char from, char to) {
  ExprPtr c = clone_expr(e);
  std::function<void(Expr&)> go = [&](Expr& x) {
    if (x.kind == Expr::Kind::Read) {
      if (x.index) go(*x.index);
      else if (x.var == from) x.var = to;
      return;
    }
    for (auto& a : x.args) go(*a);
  };
  go(*c);
  return c;
}

struct Desugarer {
  const Program& src;
  Program out;
  SymbolOrder order;
  std::map<std::string, SemType> env;
  std::map<std::string, std::string> neighbor; // "v<" / "v>" -> shared def name
  std::vector<Def> hoisted;                    // defs to insert before the current one
  std::string cur;
  int counter = 0;

  explicit Desugarer(const Program& p) : src(p), order(detail::symbol_order(p)) {
    out = p;
    out.defs.clear();
  }

  bool name_taken(const std::string& n) const {
    if (n == "in" || n == "pos") return true;
    if (src.find_def(n) || out.find_def(n)) return true;
    for (auto& d : hoisted)
      if (d.name == n) return true;
    return false;
  }

  std::string fresh(const std::string& base) {
    std::string n = base;
    while (name_taken(n)) n += "_";
    return n;
  }

  SemType type_of_vector(const std::string& name) {
    Expr r;
    r.kind = Expr::Kind::Read;
    r.name = name;
    r.var = 'i';
    return detail::lenient_type(out, order, env, r);
  }

  void push_hoisted(Def d, const SemType& t) {
    env[d.name] = t;
    hoisted.push_back(std::move(d));
  }

  // Shared strict-masked attention for a neighbor read of `v`.
  std::string neighbor_def(const std::string& v, int offset) {
    std::string key = v + (offset < 0 ? "<" : ">");
    auto it = neighbor.find(key);
    if (it != neighbor.end()) return it->second;
    SemType vt = type_of_vector(v);
    Def d;
    d.kind = Def::Kind::Attention;
    d.name = fresh(v + (offset < 0 ? "$prev" : "$next"));
    d.attn.choice = offset < 0 ? Choice::Rightmost : Choice::Leftmost;
    d.attn.mask = offset < 0 ? MaskPred::Lt : MaskPred::Gt;
    d.attn.score = mk_bool_lit(true);
    d.attn.value = mk_read(v, 'j');
    d.attn.default_value = detail::dead_value(vt);
    neighbor[key] = d.name;
    push_hoisted(std::move(d), vt);
    return neighbor[key];
  }

  // Build the attention realizing v(idx): leftmost j with idx(i) = pos(j).
  Attention subscript_attention(ExprPtr idx, const std::string& v, const SemType& vt) {
    ExprPtr lhs;
    if (idx->kind == Expr::Kind::Read && !idx->index && idx->offset == 0) {
      lhs = idx; // plain read: usable directly as the equality's i side
    } else {
      Def d;
      d.kind = Def::Kind::PositionWise;
      d.name = fresh(cur + "$idx" + std::to_string(counter++));
      d.rhs = idx;
      SemType it = detail::lenient_type(out, order, env, *idx);
      lhs = mk_read(d.name, 'i');
      push_hoisted(std::move(d), it);
    }
    Attention a;
    a.choice = Choice::Leftmost;
    a.mask = MaskPred::None;
    a.score = mk_cmp(Expr::Rel::Eq, lhs, mk_read("pos", 'j'));
    a.value = mk_read(v, 'j');
    a.default_value = detail::dead_value(vt);
    a.default_omitted = true; // positions always cover the (clipped) index
    return a;
  }

  // ctx: 'i' position-wise/default, 'j' value, 'S' score (both variables live).
  ExprPtr transform(const ExprPtr& e, char ctx) {
    switch (e->kind) {
      case Expr::Kind::NatLit: {
        int m = e->ival;
        if (m <= 1) return clone_expr(e);
        ExprPtr acc = mk_nat_lit(1);
        for (int k = 1; k < m; k++) acc = mk_bin(Expr::Kind::Add, acc, mk_nat_lit(1));
        return acc;
      }
      case Expr::Kind::Read: {
        if (e->offset != 0) {
          std::string d = neighbor_def(e->name, e->offset);
          return mk_read(d, e->var);
        }
        if (!e->index) return clone_expr(e);
        ExprPtr idx = transform(e->index, ctx);
        auto fv = free_vars(*idx);
        if (fv.count('i') && fv.count('j'))
          throw TypeError(cur, "subscript index may not mix both position variables");
        char rv = fv.count('j') ? 'j' : (fv.count('i') ? 'i' : (ctx == 'j' ? 'j' : 'i'));
        if ((ctx == 'i' && rv == 'j') || (ctx == 'j' && rv == 'i'))
          throw TypeError(cur, "free-variable violation: subscript index uses the "
                               "wrong position variable for this context");
        if (rv == 'j') idx = subst_var(idx, 'j', 'i');
        SemType vt = type_of_vector(e->name);
        Def d;
        d.kind = Def::Kind::Attention;
        d.name = fresh(cur + "$sub" + std::to_string(counter++));
        d.attn = subscript_attention(idx, e->name, vt);
        std::string dn = d.name;
        push_hoisted(std::move(d), vt);
        return mk_read(dn, rv);
      }
      default: {
        ExprPtr c = clone_expr(e);
        if (c->index) c->index = transform(c->index, ctx);
        for (auto& a : c->args) a = transform(a, ctx);
        return c;
      }
    }
  }

  SemType lenient(const ExprPtr& e) { return detail::lenient_type(out, order, env, *e); }

  void run() {
    for (const Def& d0 : src.defs) {
      Def d = d0;
      cur = d.name;
      counter = 0;
      hoisted.clear();
      switch (d.kind) {
        case Def::Kind::PositionWise: {
          // A whole-definition subscript read becomes the attention itself.
          if (d.rhs->kind == Expr::Kind::Read && d.rhs->index) {
            ExprPtr idx = transform(d.rhs->index, 'i');
            SemType vt = type_of_vector(d.rhs->name);
            std::string v = d.rhs->name;
            d.kind = Def::Kind::Attention;
            d.attn = subscript_attention(idx, v, vt);
            d.rhs = nullptr;
            env[d.name] = vt;
          } else {
            d.rhs = transform(d.rhs, 'i');
            env[d.name] = lenient(d.rhs);
          }
          break;
        }
        case Def::Kind::Attention: {
          d.attn.score = transform(d.attn.score, 'S');
          d.attn.value = transform(d.attn.value, 'j');
          if (d.attn.default_value) {
            d.attn.default_value = transform(d.attn.default_value, 'i');
            ExprPtr u = mk_ifelse(clone_expr(d.attn.value), mk_bool_lit(true),
                                  clone_expr(d.attn.default_value));
            env[d.name] = lenient(u);
          } else {
            SemType vt = lenient(d.attn.value);
            d.attn.default_value = detail::dead_value(vt);
            d.attn.default_omitted = true;
            env[d.name] = vt;
          }
          break;
        }
        case Def::Kind::PrefixSum: {
          d.psum.value = transform(d.psum.value, 'j');
          env[d.name] = SemType::nat();
          break;
        }
      }
      for (auto& h : hoisted) out.defs.push_back(std::move(h));
      out.defs.push_back(std::move(d));
    }
  }
};

} // namespace

Program desugar(const Program& p) {
  Desugarer ds(p);
  ds.run();
  return ds.out;
}

} // namespace rasp
