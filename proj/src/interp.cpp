#include "rasp/interp.hpp"

#include "rasp/lang.hpp"

#include <functional>
#include <sstream>

namespace rasp {

const std::vector<Value>* Trace::row(const std::string& name) const {
  for (auto& [n, vs] : rows)
    if (n == name) return &vs;
  return nullptr;
}

long minlen_q(const TypedProgram& p, long len) {
  long q = len; // structural floor: padded inputs keep at least one pad
  if (p.minlen) q = std::max(q, p.minlen->eval(len));
  return q;
}

int default_n(const TypedProgram& p, int len) {
  if (p.convention == Convention::Padded) return (int)minlen_q(p, len) + 1;
  return len;
}

namespace {

Value as_cell(const Value& v) {
  if (v.kind == Value::Kind::Sym) return Value::mk_str({v.sym});
  return v;
}

struct Evaluator {
  const TypedProgram& p;
  int n;
  std::map<std::string, std::vector<Value>> rows;
  Trace trace;

  Evaluator(const TypedProgram& prog, int n_) : p(prog), n(n_) {}

  int clip(long v) const {
    if (v < 0) return 0;
    if (v > n - 1) return (int)(n - 1);
    return (int)v;
  }

  Value apply_table(const Table& t, std::vector<Value> args) {
    for (size_t k = 0; k < args.size(); k++)
      if (t.arg_types.size() > k && t.arg_types[k].kind == SemType::Kind::Str)
        args[k] = as_cell(args[k]);
    const Value* res = nullptr;
    for (auto& [keys, v] : t.entries)
      if (keys == args) {
        res = &v;
        break;
      }
    if (!res) res = &*t.default_value;
    if (res->kind == Value::Kind::Nat) return Value::mk_nat(clip(res->nat));
    return *res;
  }

  // i is the def's position; j >= 0 only while evaluating a score or value.
  Value ev(const Expr& e, int i, int j) {
    switch (e.kind) {
      case Expr::Kind::BoolLit: return Value::mk_bool(e.bval);
      case Expr::Kind::SymLit: return Value::mk_sym(e.sym);
      case Expr::Kind::NatLit: return Value::mk_nat(clip(e.ival));
      case Expr::Kind::StrLit: return Value::mk_str(e.strv);
      case Expr::Kind::Read: {
        int pos = e.var == 'j' ? j : i;
        return rows.at(e.name)[pos];
      }
      case Expr::Kind::Not: return Value::mk_bool(!ev(*e.args[0], i, j).b);
      case Expr::Kind::And:
        return Value::mk_bool(ev(*e.args[0], i, j).b && ev(*e.args[1], i, j).b);
      case Expr::Kind::Or:
        return Value::mk_bool(ev(*e.args[0], i, j).b || ev(*e.args[1], i, j).b);
      case Expr::Kind::IfElse:
        return ev(*e.args[1], i, j).b ? ev(*e.args[0], i, j) : ev(*e.args[2], i, j);
      case Expr::Kind::Cmp: {
        Value a = ev(*e.args[0], i, j), b = ev(*e.args[1], i, j);
        if (a.kind == Value::Kind::Str || b.kind == Value::Kind::Str) {
          a = as_cell(a);
          b = as_cell(b);
        }
        bool r = false;
        switch (e.rel) {
          case Expr::Rel::Eq: r = a == b; break;
          case Expr::Rel::Ne: r = !(a == b); break;
          case Expr::Rel::Lt: r = a.nat < b.nat; break;
          case Expr::Rel::Le: r = a.nat <= b.nat; break;
          case Expr::Rel::Gt: r = a.nat > b.nat; break;
          case Expr::Rel::Ge: r = a.nat >= b.nat; break;
        }
        return Value::mk_bool(r);
      }
      case Expr::Kind::Add: {
        long a = ev(*e.args[0], i, j).nat, b = ev(*e.args[1], i, j).nat;
        return Value::mk_nat(clip(a + b));
      }
      case Expr::Kind::Sub: {
        long a = ev(*e.args[0], i, j).nat, b = ev(*e.args[1], i, j).nat;
        return Value::mk_nat(clip(a - b));
      }
      case Expr::Kind::Concat: {
        Value a = as_cell(ev(*e.args[0], i, j)), b = as_cell(ev(*e.args[1], i, j));
        SymStr s = a.str;
        s.insert(s.end(), b.str.begin(), b.str.end());
        return Value::mk_str(std::move(s));
      }
      case Expr::Kind::Apply: {
        std::vector<Value> args;
        for (auto& a : e.args) args.push_back(ev(*a, i, j));
        return apply_table(*p.find_table(e.name), std::move(args));
      }
    }
    return Value::mk_bool(false);
  }

  bool mask_ok(MaskPred m, int i, int j) const {
    switch (m) {
      case MaskPred::None: return true;
      case MaskPred::Lt: return j < i;
      case MaskPred::Le: return j <= i;
      case MaskPred::Gt: return j > i;
      case MaskPred::Ge: return j >= i;
    }
    return false;
  }

  std::vector<Value> eval_def(const Def& d) {
    std::vector<Value> out(n);
    for (int i = 0; i < n; i++) {
      switch (d.kind) {
        case Def::Kind::PositionWise: out[i] = ev(*d.rhs, i, -1); break;
        case Def::Kind::Attention: {
          int pick = -1;
          for (int j = 0; j < n; j++) {
            if (!mask_ok(d.attn.mask, i, j)) continue;
            if (!ev(*d.attn.score, i, j).b) continue;
            pick = j;
            if (d.attn.choice == Choice::Leftmost) break;
          }
          if (pick < 0) {
            out[i] = ev(*d.attn.default_value, i, -1);
            trace.default_taken.insert({d.name, i});
          } else {
            out[i] = ev(*d.attn.value, i, pick);
          }
          break;
        }
        case Def::Kind::PrefixSum: {
          long sum = 0;
          for (int j = 0; j <= i; j++) sum += ev(*d.psum.value, i, j).nat;
          out[i] = Value::mk_nat(clip(sum));
          break;
        }
      }
    }
    return out;
  }

  void add_row(const std::string& name, std::vector<Value> vs) {
    rows[name] = vs;
    trace.rows.push_back({name, std::move(vs)});
  }

  Trace run(const SymStr& w) {
    trace.n = n;
    std::vector<Value> in_row;
    for (int i = 0; i < n; i++)
      in_row.push_back(Value::mk_sym(i < (int)w.size() ? w[i] : PAD));
    add_row("in", std::move(in_row));
    if (p.has_pos()) {
      std::vector<Value> pos_row;
      for (int i = 0; i < n; i++) pos_row.push_back(Value::mk_nat(i));
      add_row("pos", std::move(pos_row));
    }
    for (auto& d : p.defs) add_row(d.name, eval_def(d));
    return std::move(trace);
  }
};

} // namespace

Trace eval(const TypedProgram& p, const IoInstance& io) {
  int len = (int)io.w.size();
  if (p.convention == Convention::Padded) {
    // Structural requirement only: at least one trailing pad. The declared
    // minimum length is a promise about correctness, enforced by run();
    // traces may explore shorter vectors.
    if (io.n <= len)
      throw VectorLengthError("padded evaluation needs n > the input length (" +
                              std::to_string(len) + "), got n = " +
                              std::to_string(io.n));
  } else if (io.n != len) {
    throw VectorLengthError("vector length must equal the input length (" +
                            std::to_string(len) + "), got n = " +
                            std::to_string(io.n));
  }
  if (io.n < 0) throw VectorLengthError("vector length must be nonnegative");
  Evaluator e(p, io.n);
  return e.run(io.w);
}

SymStr extract_output(const TypedProgram& p, const Trace& t) {
  const std::vector<Value>* out = t.row("out");
  SymStr res;
  switch (p.convention) {
    case Convention::LengthPreserving:
      for (auto& v : *out) res.push_back(v.sym);
      break;
    case Convention::PackedOutput:
      for (auto& v : *out) {
        Value c = as_cell(v);
        res.insert(res.end(), c.str.begin(), c.str.end());
      }
      break;
    case Convention::Padded: {
      bool seen_pad = false;
      for (auto& v : *out) {
        if (v.sym == PAD) {
          seen_pad = true;
        } else if (seen_pad) {
          throw MalformedOutput("padded output has '" + v.sym +
                                "' after a pad symbol");
        } else {
          res.push_back(v.sym);
        }
      }
      break;
    }
  }
  return res;
}

SymStr run(const TypedProgram& p, const SymStr& w, int n) {
  int len = (int)w.size();
  if (n < 0) n = default_n(p, len);
  if (p.convention == Convention::Padded) {
    long q = minlen_q(p, len);
    if (n <= q)
      throw VectorLengthError("padded run needs n > " + std::to_string(q) +
                              " for an input of length " + std::to_string(len) +
                              ", got n = " + std::to_string(n));
  }
  Trace t = eval(p, IoInstance{w, n});
  return extract_output(p, t);
}

SymStr run(const TypedProgram& p, const std::string& w, int n) {
  SymStr toks = tokenize(w, p.in_alphabet());
  if (p.convention == Convention::Padded) // accept already-padded spellings
    while (!toks.empty() && toks.back() == PAD) toks.pop_back();
  return run(p, toks, n);
}

std::string render_trace(const Trace& t, TraceFormat f) {
  std::ostringstream os;
  if (f == TraceFormat::Tsv) {
    for (auto& [name, vs] : t.rows) {
      os << name;
      for (auto& v : vs) os << '\t' << show_value(v);
      os << '\n';
    }
  } else {
    os << "| vector |";
    for (int i = 0; i < t.n; i++) os << ' ' << i << " |";
    os << '\n' << "| --- |";
    for (int i = 0; i < t.n; i++) os << " --- |";
    os << '\n';
    for (auto& [name, vs] : t.rows) {
      os << "| " << name << " |";
      for (auto& v : vs) os << ' ' << show_value(v) << " |";
      os << '\n';
    }
  }
  return os.str();
}

} // namespace rasp
