// Composing segment-reverse / segment-duplicate onto a program with packed
// outputs. Both constructions append a block that parses each packed cell
// into head/body/tail around its '|' separators, locates the enclosing
// separators with two attentions, and reassembles the output cell from
// bounded-string table lookups. Positions whose segment touches a word
// boundary lack an enclosing separator, so every index computation carries
// hsl/hsr ("has a separator to the left/right") guards; the classic scheme
// that always indexes relative to prev/next fetches from the wrong place on
// such segments.

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

const Sym kSep = "|";

bool has_sep(const SymStr& w) {
  return std::find(w.begin(), w.end(), kSep) != w.end();
}

SymStr reversed(SymStr w) {
  std::reverse(w.begin(), w.end());
  return w;
}

// Factor w as head '|' ... '|' tail; a separator-free w is its own head and
// tail with an empty body.
void factor(const SymStr& w, SymStr& head, SymStr& body, SymStr& tail) {
  auto first = std::find(w.begin(), w.end(), kSep);
  if (first == w.end()) {
    head = tail = w;
    body = {};
    return;
  }
  auto last = std::find(w.rbegin(), w.rend(), kSep).base();
  head = SymStr(w.begin(), first);
  body = SymStr(first, last);
  tail = SymStr(last, w.end());
}

// Reverse / duplicate each maximal separator-free run of w in place.
template <typename F>
SymStr map_segments(const SymStr& w, F&& f) {
  SymStr out;
  size_t i = 0;
  while (i < w.size()) {
    if (w[i] == kSep) {
      out.push_back(kSep);
      i++;
      continue;
    }
    size_t j = i;
    while (j < w.size() && w[j] != kSep) j++;
    SymStr seg(w.begin() + i, w.begin() + j);
    f(out, seg);
    i = j;
  }
  return out;
}

SymStr segment_reverse(const SymStr& w) {
  return map_segments(w, [](SymStr& out, const SymStr& seg) {
    SymStr r = reversed(seg);
    out.insert(out.end(), r.begin(), r.end());
  });
}

SymStr segment_duplicate(const SymStr& w) {
  return map_segments(w, [](SymStr& out, const SymStr& seg) {
    out.insert(out.end(), seg.begin(), seg.end());
    out.insert(out.end(), seg.begin(), seg.end());
  });
}

ExprPtr R(const std::string& v) { return mk_read(v, 'i'); }
ExprPtr Rj(const std::string& v) { return mk_read(v, 'j'); }
ExprPtr at(const std::string& v, const std::string& idx) {
  return mk_read_index(v, R(idx));
}
ExprPtr A1(const std::string& t, ExprPtr e) { return mk_apply(t, {std::move(e)}); }
ExprPtr eps() { return mk_str_lit({}); }
ExprPtr cat(ExprPtr a, ExprPtr b) {
  return mk_bin(Expr::Kind::Concat, std::move(a), std::move(b));
}
ExprPtr eq(ExprPtr a, ExprPtr b) {
  return mk_cmp(Expr::Rel::Eq, std::move(a), std::move(b));
}

struct BlockBuilder {
  Program prog;
  std::set<std::string> used;
  std::string z;
  std::vector<Value> cells; // the packed cell value space of z
  int k1 = 1;

  explicit BlockBuilder(const TypedProgram& base) {
    if (base.convention != Convention::PackedOutput)
      throw std::runtime_error("segment composition needs a base with packed outputs");
    SemType cell_t = *base.find_def("out")->type;
    prog = base;
    for (auto& d : prog.defs) d = detail::clone_def(d); // renames mutate in place
    if (prog.dialect == Dialect::BRASP) prog.dialect = Dialect::BRASP_POS;
    used = detail::def_names(prog);
    z = fresh_name(used, "z$");
    for (auto& d : prog.defs) {
      if (d.name == "out") d.name = z;
      rename_reads(d, "out", z);
    }
    cells = value_space(cell_t);
    k1 = std::max(1, prog.packed_k);
  }

  // A total table over the packed cell space.
  template <typename F>
  std::string table(const std::string& base_name, Value dflt, F&& f) {
    std::string name = fresh_name(used, base_name);
    Table t{name, {}, std::move(dflt), {}, {}};
    for (auto& cv : cells) {
      Value key = as_cell(cv);
      t.entries.push_back({{key}, f(key.str)});
    }
    prog.tables.push_back(std::move(t));
    return name;
  }

  std::string pw(const std::string& base_name, ExprPtr rhs) {
    Def d;
    d.kind = Def::Kind::PositionWise;
    d.name = fresh_name(used, base_name);
    d.rhs = std::move(rhs);
    prog.defs.push_back(std::move(d));
    return prog.defs.back().name;
  }

  std::string attn(const std::string& base_name, Choice choice, MaskPred mask,
                   ExprPtr score, ExprPtr value, ExprPtr dflt) {
    Def d;
    d.kind = Def::Kind::Attention;
    d.name = fresh_name(used, base_name);
    d.attn.choice = choice;
    d.attn.mask = mask;
    d.attn.score = std::move(score);
    d.attn.value = std::move(value);
    d.attn.default_value = std::move(dflt);
    prog.defs.push_back(std::move(d));
    return prog.defs.back().name;
  }

  // Shared front of both blocks: separator tests, cell factorization, the
  // enclosing separator positions, and the true extent [lo, hi] of the
  // separator-free run through position i.
  std::string has, headt, bodyt, tailt;
  std::string nlast, prev, next, head, body, tail, hsl, hsr, lo, hi;

  void common() {
    has = table("has$", Value::mk_bool(false),
                [](const SymStr& w) { return Value::mk_bool(has_sep(w)); });
    headt = table("head$", Value::mk_str({}), [](const SymStr& w) {
      SymStr x, y, v;
      factor(w, x, y, v);
      return Value::mk_str(x);
    });
    bodyt = table("body$", Value::mk_str({}), [](const SymStr& w) {
      SymStr x, y, v;
      factor(w, x, y, v);
      return Value::mk_str(y);
    });
    tailt = table("tail$", Value::mk_str({}), [](const SymStr& w) {
      SymStr x, y, v;
      factor(w, x, y, v);
      return Value::mk_str(v);
    });
    nlast = attn("nlast", Choice::Rightmost, MaskPred::None, mk_bool_lit(true),
                 Rj("pos"), nullptr);
    prev = attn("prev", Choice::Rightmost, MaskPred::Lt, A1(has, Rj(z)), Rj("pos"),
                R(nlast));
    next = attn("next", Choice::Leftmost, MaskPred::Gt, A1(has, Rj(z)), Rj("pos"),
                mk_nat_lit(0));
    head = pw("head", A1(headt, R(z)));
    body = pw("body", A1(bodyt, R(z)));
    tail = pw("tail", A1(tailt, R(z)));
    hsl = attn("hsl", Choice::Rightmost, MaskPred::Lt, A1(has, Rj(z)),
               mk_bool_lit(true), mk_bool_lit(false));
    hsr = attn("hsr", Choice::Leftmost, MaskPred::Gt, A1(has, Rj(z)),
               mk_bool_lit(true), mk_bool_lit(false));
    lo = pw("lo", mk_ifelse(mk_bin(Expr::Kind::Add, R(prev), mk_nat_lit(1)), R(hsl),
                            mk_nat_lit(0)));
    hi = pw("hi", mk_ifelse(mk_bin(Expr::Kind::Sub, R(next), mk_nat_lit(1)), R(hsr),
                            R(nlast)));
  }

  void out(ExprPtr rhs) {
    Def d;
    d.kind = Def::Kind::PositionWise;
    d.name = "out"; // the renamed base freed the name
    d.rhs = std::move(rhs);
    prog.defs.push_back(std::move(d));
  }

  ExprPtr one_if(const std::string& flag) {
    return mk_ifelse(mk_nat_lit(1), R(flag), mk_nat_lit(0));
  }
  ExprPtr at_first() { return eq(R("pos"), mk_nat_lit(0)); }
  ExprPtr at_last() { return eq(R("pos"), R(nlast)); }

  TypedProgram finish(int out_k) {
    prog.packed_k = out_k;
    return typecheck(desugar(prog));
  }
};

} // namespace

TypedProgram compose_mapreverse(const TypedProgram& base) {
  BlockBuilder b(base);
  b.common();
  std::string rev = b.table("rev$", Value::mk_str({}), [](const SymStr& w) {
    return Value::mk_str(reversed(w));
  });
  std::string rbodyt = b.table("revseg$", Value::mk_str({}), [](const SymStr& w) {
    return Value::mk_str(segment_reverse(w));
  });
  // Mirror position within the run; the cell fetched from there lands here
  // reversed. A run with no separator on one side spills the reversed
  // head/tail of the adjacent separator cell into the run's outermost cell.
  std::string src =
      b.pw("src", mk_bin(Expr::Kind::Add, R(b.lo),
                         mk_bin(Expr::Kind::Sub, R(b.hi), R("pos"))));
  std::string ptail = b.pw("ptail", A1(rev, at(b.tail, b.prev)));
  std::string rbody = b.pw("rbody", A1(rbodyt, R(b.body)));
  std::string nhead = b.pw("nhead", A1(rev, at(b.head, b.next)));
  std::string nosep = b.pw(
      "nosep",
      cat(cat(mk_ifelse(R(nhead), mk_bin(Expr::Kind::And, R(b.hsr), b.at_first()),
                        eps()),
              A1(rev, mk_read_index(b.z, R(src)))),
          mk_ifelse(R(ptail), mk_bin(Expr::Kind::And, R(b.hsl), b.at_last()),
                    eps())));
  std::string sep = b.pw(
      "sep",
      cat(cat(mk_ifelse(R(ptail), R(b.hsl),
                        mk_ifelse(A1(rev, R(b.head)), b.at_first(), eps())),
              R(rbody)),
          mk_ifelse(R(nhead), R(b.hsr),
                    mk_ifelse(A1(rev, R(b.tail)), b.at_last(), eps()))));
  b.out(mk_ifelse(R(sep), A1(b.has, R(b.z)), R(nosep)));
  return b.finish(3 * b.k1);
}

TypedProgram compose_mapduplicate(const TypedProgram& base) {
  BlockBuilder b(base);
  b.common();
  std::string dupt = b.table("dupseg$", Value::mk_str({}), [](const SymStr& w) {
    return Value::mk_str(segment_duplicate(w));
  });
  // Separator cells emit both copies of the short boundary segments around
  // them; at the word boundary the missing neighbour's contribution is the
  // cell's own head/tail again.
  std::string ptail =
      b.pw("ptail", mk_ifelse(cat(mk_read(b.tail, 'i', -1), R(b.head)),
                              mk_cmp(Expr::Rel::Gt, R("pos"), mk_nat_lit(0)),
                              cat(R(b.head), R(b.head))));
  std::string nhead =
      b.pw("nhead", mk_ifelse(cat(R(b.tail), mk_read(b.head, 'i', +1)),
                              mk_cmp(Expr::Rel::Lt, R("pos"), R(b.nlast)),
                              cat(R(b.tail), R(b.tail))));
  std::string dbody = b.pw("dbody", A1(dupt, R(b.body)));
  std::string sep = b.pw("sep", cat(cat(R(ptail), R(dbody)), R(nhead)));
  // A separator-free run's doubled contents are dealt out two chunks per
  // position; the chunk list wraps past the far separator's head back to the
  // near separator's tail, with hsl/hsr deciding whether those chunks exist.
  std::string half =
      b.pw("half", mk_cmp(Expr::Rel::Le,
                          mk_bin(Expr::Kind::Add,
                                 mk_bin(Expr::Kind::Sub, R("pos"), R(b.lo)),
                                 b.one_if(b.hsl)),
                          mk_bin(Expr::Kind::Add,
                                 mk_bin(Expr::Kind::Sub, R(b.hi), R("pos")),
                                 b.one_if(b.hsr))));
  std::string halfs =
      b.pw("halfs", mk_cmp(Expr::Rel::Lt,
                           mk_bin(Expr::Kind::Add,
                                  mk_bin(Expr::Kind::Sub, R("pos"), R(b.lo)),
                                  b.one_if(b.hsl)),
                           mk_bin(Expr::Kind::Add,
                                  mk_bin(Expr::Kind::Sub, R(b.hi), R("pos")),
                                  b.one_if(b.hsr))));
  std::string src1 = b.pw(
      "src1",
      mk_ifelse(
          mk_bin(Expr::Kind::Add, R("pos"),
                 mk_ifelse(mk_bin(Expr::Kind::Sub, R("pos"), R(b.prev)), R(b.hsl),
                           mk_bin(Expr::Kind::Sub, R("pos"), R(b.lo)))),
          R(half),
          mk_bin(Expr::Kind::Sub,
                 mk_bin(Expr::Kind::Sub, R("pos"),
                        mk_bin(Expr::Kind::Add,
                               mk_bin(Expr::Kind::Sub, R(b.hi), R("pos")),
                               mk_nat_lit(1))),
                 b.one_if(b.hsr))));
  std::string src2 =
      b.pw("src2", mk_ifelse(mk_ifelse(R(b.prev), R(b.hsl), R(b.lo)),
                             mk_bin(Expr::Kind::And, R(half),
                                    mk_un(Expr::Kind::Not, R(halfs))),
                             mk_bin(Expr::Kind::Add, R(src1), mk_nat_lit(1))));
  std::string zat1 = b.pw("zat1", mk_read_index(b.z, R(src1)));
  std::string zat2 = b.pw("zat2", mk_read_index(b.z, R(src2)));
  std::string sym1 =
      b.pw("sym1", mk_ifelse(A1(b.headt, R(zat1)),
                             mk_bin(Expr::Kind::And, R(b.hsr), eq(R(src1), R(b.next))),
                             A1(b.tailt, R(zat1))));
  std::string sym2 =
      b.pw("sym2", mk_ifelse(A1(b.headt, R(zat2)),
                             mk_bin(Expr::Kind::And, R(b.hsr), eq(R(src2), R(b.next))),
                             A1(b.tailt, R(zat2))));
  std::string nosep = b.pw("nosep", cat(R(sym1), R(sym2)));
  b.out(mk_ifelse(R(sep), A1(b.has, R(b.z)), R(nosep)));
  return b.finish(6 * b.k1);
}

} // namespace rasp
