#include "rasp/lang.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <sstream>

namespace rasp {

// ---------- AST constructors ----------

ExprPtr mk_bool_lit(bool v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::BoolLit;
  e->bval = v;
  return e;
}
ExprPtr mk_sym_lit(Sym s) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::SymLit;
  e->sym = std::move(s);
  return e;
}
ExprPtr mk_nat_lit(int v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::NatLit;
  e->ival = v;
  return e;
}
ExprPtr mk_str_lit(SymStr s) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::StrLit;
  e->strv = std::move(s);
  return e;
}
ExprPtr mk_read(std::string name, char var, int offset) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Read;
  e->name = std::move(name);
  e->var = var;
  e->offset = offset;
  return e;
}
ExprPtr mk_read_index(std::string name, ExprPtr index) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Read;
  e->name = std::move(name);
  e->index = std::move(index);
  return e;
}
ExprPtr mk_un(Expr::Kind k, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->args = {std::move(a)};
  return e;
}
ExprPtr mk_bin(Expr::Kind k, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->args = {std::move(a), std::move(b)};
  return e;
}
ExprPtr mk_cmp(Expr::Rel rel, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Cmp;
  e->rel = rel;
  e->args = {std::move(a), std::move(b)};
  return e;
}
ExprPtr mk_ifelse(ExprPtr then_e, ExprPtr cond, ExprPtr else_e) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::IfElse;
  e->args = {std::move(then_e), std::move(cond), std::move(else_e)};
  return e;
}
ExprPtr mk_apply(std::string table, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Apply;
  e->name = std::move(table);
  e->args = std::move(args);
  return e;
}
ExprPtr clone_expr(const ExprPtr& e) {
  if (!e) return nullptr;
  auto c = std::make_shared<Expr>(*e);
  c->index = clone_expr(e->index);
  for (auto& a : c->args) a = clone_expr(a);
  return c;
}

// ---------- MinLen ----------

long MinLen::eval(long l) const {
  switch (kind) {
    case Kind::Var: return l;
    case Kind::Lit: return lit;
    case Kind::Add: return a->eval(l) + b->eval(l);
    case Kind::Mul: return a->eval(l) * b->eval(l);
    case Kind::Max: return std::max(a->eval(l), b->eval(l));
  }
  return 0;
}
std::string MinLen::show() const {
  switch (kind) {
    case Kind::Var: return "l";
    case Kind::Lit: return std::to_string(lit);
    case Kind::Add: return "(" + a->show() + "+" + b->show() + ")";
    case Kind::Mul: return "(" + a->show() + "*" + b->show() + ")";
    case Kind::Max: return "max(" + a->show() + "," + b->show() + ")";
  }
  return "?";
}
MinLen MinLen::var() { MinLen m; m.kind = Kind::Var; return m; }
MinLen MinLen::lit_(long v) { MinLen m; m.kind = Kind::Lit; m.lit = v; return m; }
static MinLen mk2(MinLen::Kind k, MinLen x, MinLen y) {
  MinLen m;
  m.kind = k;
  m.a = std::make_shared<MinLen>(std::move(x));
  m.b = std::make_shared<MinLen>(std::move(y));
  return m;
}
MinLen MinLen::add(MinLen x, MinLen y) { return mk2(Kind::Add, std::move(x), std::move(y)); }
MinLen MinLen::mul(MinLen x, MinLen y) { return mk2(Kind::Mul, std::move(x), std::move(y)); }
MinLen MinLen::max_(MinLen x, MinLen y) { return mk2(Kind::Max, std::move(x), std::move(y)); }
MinLen MinLen::substitute(const MinLen& outer, const MinLen& inner) {
  switch (outer.kind) {
    case Kind::Var: return inner;
    case Kind::Lit: return outer;
    default: {
      MinLen m;
      m.kind = outer.kind;
      m.a = std::make_shared<MinLen>(substitute(*outer.a, inner));
      m.b = std::make_shared<MinLen>(substitute(*outer.b, inner));
      return m;
    }
  }
}

// ---------- Program helpers ----------

const Table* Program::find_table(const std::string& n) const {
  for (const auto& t : tables)
    if (t.name == n) return &t;
  return nullptr;
}
const Def* Program::find_def(const std::string& n) const {
  for (const auto& d : defs)
    if (d.name == n) return &d;
  return nullptr;
}
int Program::def_index(const std::string& n) const {
  for (size_t k = 0; k < defs.size(); ++k)
    if (defs[k].name == n) return static_cast<int>(k);
  return -1;
}
std::vector<Sym> Program::in_alphabet() const {
  auto a = sigma;
  if (convention == Convention::Padded &&
      std::find(a.begin(), a.end(), PAD) == a.end())
    a.push_back(PAD);
  return a;
}
std::vector<Sym> Program::out_alphabet() const {
  auto a = gamma;
  // The pad symbol is always an admissible vector value: padded outputs carry
  // it by definition, and length-preserving programs idiomatically use it as a
  // sentinel default that never reaches the output.
  if (convention != Convention::PackedOutput &&
      std::find(a.begin(), a.end(), PAD) == a.end())
    a.push_back(PAD);
  return a;
}

// ---------- Lexer ----------

namespace {

enum class Tok {
  Ident, Int, SymLit, StrLit, Punct, End
};

struct Token {
  Tok kind = Tok::End;
  std::string text; // Ident name / Punct chars / literal payload
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;
  Token cur;

  explicit Lexer(const std::string& s) : src(s) { next(); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, cur.line, cur.col);
  }

  void advance(size_t k) {
    for (size_t i = 0; i < k && pos < src.size(); ++i, ++pos) {
      if (src[pos] == '\n') { ++line; col = 1; } else ++col;
    }
  }

  void skip_ws() {
    for (;;) {
      while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t' ||
                                  src[pos] == '\r' || src[pos] == '\n'))
        advance(1);
      if (pos < src.size() && src[pos] == '#') {
        while (pos < src.size() && src[pos] != '\n') advance(1);
        continue;
      }
      break;
    }
  }

  static bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool ident_cont(char c) {
    return ident_start(c) || (c >= '0' && c <= '9') || c == '$';
  }

  void next() {
    skip_ws();
    cur.line = line;
    cur.col = col;
    if (pos >= src.size()) { cur.kind = Tok::End; cur.text.clear(); return; }
    char c = src[pos];
    if (ident_start(c)) {
      size_t s = pos;
      while (pos < src.size() && ident_cont(src[pos])) advance(1);
      cur.kind = Tok::Ident;
      cur.text = src.substr(s, pos - s);
      return;
    }
    if (c >= '0' && c <= '9') {
      size_t s = pos;
      while (pos < src.size() && src[pos] >= '0' && src[pos] <= '9') advance(1);
      cur.kind = Tok::Int;
      cur.text = src.substr(s, pos - s);
      return;
    }
    if (c == '\'') {
      advance(1);
      size_t s = pos;
      while (pos < src.size() && src[pos] != '\'') advance(1);
      if (pos >= src.size()) throw ParseError("unterminated symbol literal", cur.line, cur.col);
      cur.kind = Tok::SymLit;
      cur.text = src.substr(s, pos - s);
      advance(1);
      if (cur.text.empty())
        throw ParseError("empty symbol literal (use \"\" for the empty string)", cur.line, cur.col);
      return;
    }
    if (c == '"') {
      advance(1);
      size_t s = pos;
      while (pos < src.size() && src[pos] != '"') advance(1);
      if (pos >= src.size()) throw ParseError("unterminated string literal", cur.line, cur.col);
      cur.kind = Tok::StrLit;
      cur.text = src.substr(s, pos - s);
      advance(1);
      return;
    }
    // multi-char punct
    static const char* two[] = {"<=", ">=", "!=", "->"};
    for (const char* t : two) {
      if (src.compare(pos, 2, t) == 0) {
        cur.kind = Tok::Punct;
        cur.text = t;
        advance(2);
        return;
      }
    }
    cur.kind = Tok::Punct;
    cur.text = std::string(1, c);
    advance(1);
  }

  struct State { size_t pos; int line, col; Token cur; };
  State save() const { return {pos, line, col, cur}; }
  void restore(const State& s) { pos = s.pos; line = s.line; col = s.col; cur = s.cur; }

  bool is_punct(const std::string& p) const { return cur.kind == Tok::Punct && cur.text == p; }
  bool is_ident(const std::string& w) const { return cur.kind == Tok::Ident && cur.text == w; }
  void expect_punct(const std::string& p) {
    if (!is_punct(p)) fail("expected '" + p + "', got '" + cur.text + "'");
    next();
  }
  std::string expect_ident(const char* what) {
    if (cur.kind != Tok::Ident) fail(std::string("expected ") + what);
    std::string s = cur.text;
    next();
    return s;
  }
};

const char* kRawMarker = "\x01raw";

struct Parser {
  Lexer lx;
  Program prog;
  std::set<std::string> table_names;

  explicit Parser(const std::string& src) : lx(src) {}

  // Raw symbol tokens for sigma/gamma lines: everything up to ';', whitespace
  // separated, quotes optional.
  std::vector<Sym> parse_symlist() {
    std::vector<Sym> out;
    while (!lx.is_punct(";")) {
      if (lx.cur.kind == Tok::End) lx.fail("unterminated symbol list");
      if (lx.cur.kind == Tok::SymLit || lx.cur.kind == Tok::Ident ||
          lx.cur.kind == Tok::Int) {
        out.push_back(lx.cur.text);
        lx.next();
      } else if (lx.cur.kind == Tok::Punct) {
        // raw single punct symbol like | or a UTF-8 char split into bytes:
        // collect maximal run of non-space punct bytes as one symbol
        std::string s = lx.cur.text;
        lx.next();
        // UTF-8 continuation bytes arrive as separate Punct tokens without
        // intervening whitespace; glue them (they are never ';').
        while (lx.cur.kind == Tok::Punct && lx.cur.text != ";" &&
               (static_cast<unsigned char>(lx.cur.text[0]) >= 0x80)) {
          s += lx.cur.text;
          lx.next();
        }
        out.push_back(s);
      } else {
        lx.fail("bad symbol token");
      }
    }
    lx.next(); // ';'
    return out;
  }

  Value parse_value_literal() {
    if (lx.cur.kind == Tok::SymLit) {
      Value v = Value::mk_sym(lx.cur.text);
      lx.next();
      return v;
    }
    if (lx.cur.kind == Tok::StrLit) {
      // raw bytes; split into symbols once all alphabets are known
      Value v;
      v.kind = Value::Kind::Str;
      if (!lx.cur.text.empty()) v.str.push_back(lx.cur.text);
      v.sym = kRawMarker;
      lx.next();
      return v;
    }
    if (lx.cur.kind == Tok::Int) {
      Value v = Value::mk_nat(std::stoi(lx.cur.text));
      lx.next();
      return v;
    }
    if (lx.is_ident("true") || lx.is_ident("false")) {
      Value v = Value::mk_bool(lx.cur.text == "true");
      lx.next();
      return v;
    }
    lx.fail("expected a literal (symbol, string, integer or boolean)");
  }

  void parse_table() {
    Table t;
    t.name = lx.expect_ident("table name");
    table_names.insert(t.name);
    lx.expect_punct("{");
    while (!lx.is_punct("}")) {
      std::vector<Value> key;
      bool is_default = false;
      if (lx.is_ident("default")) {
        is_default = true;
        lx.next();
      } else if (lx.is_punct("(")) {
        lx.next();
        key.push_back(parse_value_literal());
        while (lx.is_punct(",")) {
          lx.next();
          key.push_back(parse_value_literal());
        }
        lx.expect_punct(")");
      } else {
        key.push_back(parse_value_literal());
      }
      lx.expect_punct("->");
      Value res = parse_value_literal();
      lx.expect_punct(";");
      if (is_default) {
        if (t.default_value) lx.fail("duplicate default in table " + t.name);
        t.default_value = res;
      } else {
        t.entries.emplace_back(std::move(key), std::move(res));
      }
    }
    lx.next(); // '}'
    prog.tables.push_back(std::move(t));
  }

  MinLen parse_minlen() { return parse_ml_add(); }
  MinLen parse_ml_add() {
    MinLen x = parse_ml_mul();
    while (lx.is_punct("+")) {
      lx.next();
      x = MinLen::add(std::move(x), parse_ml_mul());
    }
    return x;
  }
  MinLen parse_ml_mul() {
    MinLen x = parse_ml_atom();
    while (lx.is_punct("*")) {
      lx.next();
      x = MinLen::mul(std::move(x), parse_ml_atom());
    }
    return x;
  }
  MinLen parse_ml_atom() {
    if (lx.cur.kind == Tok::Int) {
      long v = std::stol(lx.cur.text);
      lx.next();
      return MinLen::lit_(v);
    }
    if (lx.is_ident("l")) {
      lx.next();
      return MinLen::var();
    }
    if (lx.is_ident("max")) {
      lx.next();
      lx.expect_punct("(");
      MinLen a = parse_ml_add();
      lx.expect_punct(",");
      MinLen b = parse_ml_add();
      lx.expect_punct(")");
      return MinLen::max_(std::move(a), std::move(b));
    }
    if (lx.is_punct("(")) {
      lx.next();
      MinLen x = parse_ml_add();
      lx.expect_punct(")");
      return x;
    }
    lx.fail("bad minlen expression");
  }

  // ----- expressions -----

  bool at_keyword(const char* w) const { return lx.is_ident(w); }

  ExprPtr parse_expr(char bound /* 'i', 'j' or 'b' for both */) {
    ExprPtr e = parse_or(bound);
    if (lx.is_ident("if")) {
      lx.next();
      ExprPtr c = parse_or(bound);
      if (!lx.is_ident("else")) lx.fail("expected 'else'");
      lx.next();
      ExprPtr els = parse_expr(bound);
      return mk_ifelse(std::move(e), std::move(c), std::move(els));
    }
    return e;
  }
  ExprPtr parse_or(char bound) {
    ExprPtr e = parse_and(bound);
    while (lx.is_ident("or")) {
      lx.next();
      e = mk_bin(Expr::Kind::Or, std::move(e), parse_and(bound));
    }
    return e;
  }
  ExprPtr parse_and(char bound) {
    ExprPtr e = parse_not(bound);
    while (lx.is_ident("and")) {
      lx.next();
      e = mk_bin(Expr::Kind::And, std::move(e), parse_not(bound));
    }
    return e;
  }
  ExprPtr parse_not(char bound) {
    if (lx.is_punct("!")) {
      lx.next();
      return mk_un(Expr::Kind::Not, parse_not(bound));
    }
    return parse_cmp(bound);
  }
  ExprPtr parse_cmp(char bound) {
    ExprPtr e = parse_add(bound);
    Expr::Rel rel;
    if (lx.is_punct("=")) rel = Expr::Rel::Eq;
    else if (lx.is_punct("!=")) rel = Expr::Rel::Ne;
    else if (lx.is_punct("<")) rel = Expr::Rel::Lt;
    else if (lx.is_punct("<=")) rel = Expr::Rel::Le;
    else if (lx.is_punct(">")) rel = Expr::Rel::Gt;
    else if (lx.is_punct(">=")) rel = Expr::Rel::Ge;
    else return e;
    lx.next();
    ExprPtr r = parse_add(bound);
    return mk_cmp(rel, std::move(e), std::move(r));
  }
  // Clipping is per node, so chained +/- without parentheses is rejected.
  ExprPtr parse_add(char bound) {
    ExprPtr e = parse_concat(bound);
    if (lx.is_punct("+") || lx.is_punct("-")) {
      bool plus = lx.is_punct("+");
      lx.next();
      ExprPtr r = parse_concat(bound);
      e = mk_bin(plus ? Expr::Kind::Add : Expr::Kind::Sub, std::move(e), std::move(r));
      if (lx.is_punct("+") || lx.is_punct("-"))
        lx.fail("chained +/- requires explicit parentheses (clipping is per node)");
    }
    return e;
  }
  ExprPtr parse_concat(char bound) {
    ExprPtr e = parse_atom(bound);
    while (lx.is_punct(".")) {
      lx.next();
      e = mk_bin(Expr::Kind::Concat, std::move(e), parse_atom(bound));
    }
    return e;
  }

  bool var_ok(char v, char bound) const { return bound == 'b' ? (v == 'i' || v == 'j') : v == bound; }

  ExprPtr parse_atom(char bound) {
    if (lx.is_punct("(")) {
      lx.next();
      ExprPtr e = parse_expr(bound);
      lx.expect_punct(")");
      return e;
    }
    if (lx.cur.kind == Tok::SymLit) {
      Sym s = lx.cur.text;
      lx.next();
      return mk_sym_lit(std::move(s));
    }
    if (lx.cur.kind == Tok::StrLit) {
      // raw payload; split into symbols at end of parse
      std::string raw = lx.cur.text;
      lx.next();
      auto e = mk_str_lit({});
      if (!raw.empty()) {
        e->strv.push_back(raw);
        e->sym = kRawMarker;
      }
      return e;
    }
    if (lx.cur.kind == Tok::Int) {
      int v = std::stoi(lx.cur.text);
      lx.next();
      return mk_nat_lit(v);
    }
    if (lx.is_ident("true")) { lx.next(); return mk_bool_lit(true); }
    if (lx.is_ident("false")) { lx.next(); return mk_bool_lit(false); }
    if (lx.cur.kind == Tok::Ident) {
      std::string name = lx.cur.text;
      lx.next();
      if (!lx.is_punct("(")) lx.fail("expected '(' after '" + name + "' (vector read or table application)");
      lx.next();
      if (table_names.count(name)) {
        std::vector<ExprPtr> args;
        args.push_back(parse_expr(bound));
        while (lx.is_punct(",")) {
          lx.next();
          args.push_back(parse_expr(bound));
        }
        lx.expect_punct(")");
        return mk_apply(name, std::move(args));
      }
      // vector read: v(i), v(j), v(i-1), v(i+1) or v(<expr>)
      if (lx.cur.kind == Tok::Ident && lx.cur.text.size() == 1 &&
          (lx.cur.text[0] == 'i' || lx.cur.text[0] == 'j')) {
        char v = lx.cur.text[0];
        // lookahead: plain or neighbor read?
        auto save = lx.save();
        lx.next();
        if (lx.is_punct(")")) {
          if (!var_ok(v, bound)) lx.fail(std::string("variable '") + v + "' not in scope here");
          lx.next();
          return mk_read(name, v, 0);
        }
        if ((lx.is_punct("-") || lx.is_punct("+"))) {
          bool plus = lx.is_punct("+");
          lx.next();
          if (lx.cur.kind == Tok::Int && lx.cur.text == "1") {
            lx.next();
            if (lx.is_punct(")")) {
              if (!var_ok(v, bound)) lx.fail(std::string("variable '") + v + "' not in scope here");
              lx.next();
              return mk_read(name, v, plus ? 1 : -1);
            }
          }
        }
        lx.restore(save); // not a plain/neighbor read: full subscript expression
      }
      ExprPtr idx = parse_expr(bound);
      lx.expect_punct(")");
      return mk_read_index(name, std::move(idx));
    }
    lx.fail("expected expression, got '" + lx.cur.text + "'");
  }

  MaskPred parse_mask() {
    if (lx.is_ident("true")) {
      lx.next();
      return MaskPred::None;
    }
    if (lx.is_ident("j")) {
      lx.next();
      MaskPred m;
      if (lx.is_punct("<")) m = MaskPred::Lt;
      else if (lx.is_punct("<=")) m = MaskPred::Le;
      else if (lx.is_punct(">")) m = MaskPred::Gt;
      else if (lx.is_punct(">=")) m = MaskPred::Ge;
      else lx.fail("expected mask comparison after 'j'");
      lx.next();
      if (!lx.is_ident("i")) lx.fail("mask must compare j with i");
      lx.next();
      return m;
    }
    lx.fail("expected mask ('true' or a j/i comparison)");
  }

  void parse_def() {
    Def d;
    d.name = lx.expect_ident("definition name");
    if (prog.find_def(d.name) || d.name == "in" || d.name == "pos")
      lx.fail("duplicate definition of '" + d.name + "'");
    lx.expect_punct("(");
    if (!lx.is_ident("i")) lx.fail("definitions bind 'i'");
    lx.next();
    lx.expect_punct(")");
    lx.expect_punct("=");
    if (lx.is_ident("leftmost") || lx.is_ident("rightmost")) {
      d.kind = Def::Kind::Attention;
      d.attn.choice = lx.is_ident("leftmost") ? Choice::Leftmost : Choice::Rightmost;
      lx.next();
      if (!lx.is_ident("j")) lx.fail("attention binds 'j'");
      lx.next();
      lx.expect_punct("[");
      d.attn.mask = parse_mask();
      if (lx.is_punct(",")) {
        lx.next();
        d.attn.score = parse_expr('b');
      } else {
        d.attn.score = mk_bool_lit(true);
      }
      lx.expect_punct("]");
      d.attn.value = parse_expr('j');
      if (lx.is_punct(":")) {
        lx.next();
        d.attn.default_value = parse_expr('i');
      } else {
        d.attn.default_omitted = true;
      }
    } else if (lx.is_ident("sum")) {
      d.kind = Def::Kind::PrefixSum;
      lx.next();
      if (!lx.is_ident("j")) lx.fail("sum binds 'j'");
      lx.next();
      lx.expect_punct("[");
      MaskPred m = parse_mask();
      if (m != MaskPred::Le) lx.fail("prefix sum mask must be j<=i");
      lx.expect_punct("]");
      d.psum.value = parse_expr('j');
    } else {
      d.kind = Def::Kind::PositionWise;
      d.rhs = parse_expr('i');
    }
    lx.expect_punct(";");
    prog.defs.push_back(std::move(d));
  }

  Program run() {
    bool saw_dialect = false;
    while (lx.cur.kind != Tok::End) {
      if (lx.is_ident("dialect")) {
        lx.next();
        lx.expect_punct(":");
        std::string d = lx.expect_ident("dialect name");
        if (d == "brasp") prog.dialect = Dialect::BRASP;
        else if (d == "brasp_pos") prog.dialect = Dialect::BRASP_POS;
        else if (d == "srasp") prog.dialect = Dialect::SRASP;
        else lx.fail("unknown dialect '" + d + "'");
        saw_dialect = true;
        lx.expect_punct(";");
      } else if (lx.is_ident("sigma")) {
        lx.next();
        lx.expect_punct(":");
        prog.sigma = parse_symlist();
      } else if (lx.is_ident("gamma")) {
        lx.next();
        lx.expect_punct(":");
        prog.gamma = parse_symlist();
      } else if (lx.is_ident("io")) {
        lx.next();
        lx.expect_punct(":");
        if (lx.is_ident("length_preserving")) {
          prog.convention = Convention::LengthPreserving;
          lx.next();
        } else if (lx.is_ident("packed")) {
          lx.next();
          lx.expect_punct("(");
          if (lx.cur.kind != Tok::Int) lx.fail("packed bound must be an integer");
          prog.packed_k = std::stoi(lx.cur.text);
          if (prog.packed_k < 1) lx.fail("packed bound must be >= 1");
          lx.next();
          lx.expect_punct(")");
          prog.convention = Convention::PackedOutput;
        } else if (lx.is_ident("padded")) {
          prog.convention = Convention::Padded;
          lx.next();
        } else {
          lx.fail("unknown io convention");
        }
        lx.expect_punct(";");
      } else if (lx.is_ident("minlen")) {
        lx.next();
        lx.expect_punct(":");
        prog.minlen = parse_minlen();
        lx.expect_punct(";");
      } else if (lx.is_ident("table")) {
        lx.next();
        parse_table();
      } else {
        parse_def();
      }
    }
    if (!saw_dialect) throw ParseError("missing dialect header", 1, 1);
    if (!prog.find_def("out")) throw ParseError("program must define 'out'", 1, 1);
    // dialect/convention compatibility
    if (prog.convention == Convention::Padded && prog.dialect != Dialect::SRASP)
      throw ParseError("padded io requires dialect srasp", 1, 1);
    if (prog.dialect == Dialect::SRASP && prog.convention != Convention::Padded)
      throw ParseError("srasp programs use padded io", 1, 1);
    resolve_raw_strings();
    return std::move(prog);
  }

  // ----- post-pass: split raw "..." literals into symbols -----

  void collect_syms(const ExprPtr& e, std::vector<Sym>& uni) const {
    if (!e) return;
    if (e->kind == Expr::Kind::SymLit) uni.push_back(e->sym);
    collect_syms(e->index, uni);
    for (const auto& a : e->args) collect_syms(a, uni);
  }

  void fix_str(SymStr& strv, std::string& marker, const std::vector<Sym>& uni) const {
    if (marker != kRawMarker) return;
    marker.clear();
    if (strv.empty()) return;
    std::string raw = strv[0];
    strv = tokenize(raw, uni);
  }

  void fix_expr(const ExprPtr& e, const std::vector<Sym>& uni) const {
    if (!e) return;
    if (e->kind == Expr::Kind::StrLit) fix_str(e->strv, e->sym, uni);
    fix_expr(e->index, uni);
    for (const auto& a : e->args) fix_expr(a, uni);
  }

  void resolve_raw_strings() {
    std::vector<Sym> uni = prog.sigma;
    for (const auto& s : prog.gamma) uni.push_back(s);
    uni.push_back(PAD);
    uni.push_back(ENDMARK);
    for (const auto& t : prog.tables) {
      for (const auto& [k, v] : t.entries) {
        for (const auto& kv : k)
          if (kv.kind == Value::Kind::Sym) uni.push_back(kv.sym);
        if (v.kind == Value::Kind::Sym) uni.push_back(v.sym);
      }
      if (t.default_value && t.default_value->kind == Value::Kind::Sym)
        uni.push_back(t.default_value->sym);
    }
    for (const auto& d : prog.defs) {
      collect_syms(d.rhs, uni);
      collect_syms(d.attn.score, uni);
      collect_syms(d.attn.value, uni);
      collect_syms(d.attn.default_value, uni);
      collect_syms(d.psum.value, uni);
    }
    auto fix_value = [&](Value& v) {
      if (v.kind == Value::Kind::Str) fix_str(v.str, v.sym, uni);
    };
    for (auto& t : prog.tables) {
      for (auto& [k, v] : t.entries) {
        for (auto& kv : k) fix_value(kv);
        fix_value(v);
      }
      if (t.default_value) fix_value(*t.default_value);
    }
    for (auto& d : prog.defs) {
      fix_expr(d.rhs, uni);
      fix_expr(d.attn.score, uni);
      fix_expr(d.attn.value, uni);
      fix_expr(d.attn.default_value, uni);
      fix_expr(d.psum.value, uni);
    }
  }
};

} // namespace

Program parse(const std::string& text, const std::string& name) {
  Parser p(text);
  Program prog = p.run();
  prog.name = name;
  return prog;
}

Program parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  std::string stem = path;
  if (auto sl = stem.find_last_of('/'); sl != std::string::npos) stem = stem.substr(sl + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  return parse(ss.str(), stem);
}

} // namespace rasp
