#include "rasp/lang.hpp"

#include <sstream>

namespace rasp {

namespace {

// Precedence levels mirroring the grammar: ifelse(0) or(1) and(2) not(3)
// cmp(4) add(5) concat(6) atom(7).
int level_of(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::IfElse: return 0;
    case Expr::Kind::Or: return 1;
    case Expr::Kind::And: return 2;
    case Expr::Kind::Not: return 3;
    case Expr::Kind::Cmp: return 4;
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return 5;
    case Expr::Kind::Concat: return 6;
    default: return 7;
  }
}

std::string rel_str(Expr::Rel r) {
  switch (r) {
    case Expr::Rel::Eq: return "=";
    case Expr::Rel::Ne: return "!=";
    case Expr::Rel::Lt: return "<";
    case Expr::Rel::Le: return "<=";
    case Expr::Rel::Gt: return ">";
    case Expr::Rel::Ge: return ">=";
  }
  return "?";
}

void pp(const Expr& e, int need, std::ostream& os);

void pp_child(const ExprPtr& e, int need, std::ostream& os) { pp(*e, need, os); }

void pp(const Expr& e, int need, std::ostream& os) {
  int lv = level_of(e);
  bool paren = lv < need;
  if (paren) os << "(";
  switch (e.kind) {
    case Expr::Kind::BoolLit: os << (e.bval ? "true" : "false"); break;
    case Expr::Kind::SymLit: os << "'" << e.sym << "'"; break;
    case Expr::Kind::NatLit: os << e.ival; break;
    case Expr::Kind::StrLit: os << "\"" << concat_syms(e.strv) << "\""; break;
    case Expr::Kind::Read:
      os << e.name << "(";
      if (e.index) pp_child(e.index, 0, os);
      else {
        os << e.var;
        if (e.offset == 1) os << "+1";
        if (e.offset == -1) os << "-1";
      }
      os << ")";
      break;
    case Expr::Kind::Not:
      os << "!";
      pp_child(e.args[0], 3, os);
      break;
    case Expr::Kind::And:
      pp_child(e.args[0], 2, os);
      os << " and ";
      pp_child(e.args[1], 3, os);
      break;
    case Expr::Kind::Or:
      pp_child(e.args[0], 1, os);
      os << " or ";
      pp_child(e.args[1], 2, os);
      break;
    case Expr::Kind::IfElse:
      pp_child(e.args[0], 1, os);
      os << " if ";
      pp_child(e.args[1], 1, os);
      os << " else ";
      pp_child(e.args[2], 0, os);
      break;
    case Expr::Kind::Cmp:
      pp_child(e.args[0], 5, os);
      os << " " << rel_str(e.rel) << " ";
      pp_child(e.args[1], 5, os);
      break;
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
      pp_child(e.args[0], 6, os);
      os << (e.kind == Expr::Kind::Add ? " + " : " - ");
      pp_child(e.args[1], 6, os);
      break;
    case Expr::Kind::Concat:
      pp_child(e.args[0], 6, os);
      os << " . ";
      pp_child(e.args[1], 7, os);
      break;
    case Expr::Kind::Apply:
      os << e.name << "(";
      for (size_t k = 0; k < e.args.size(); ++k) {
        if (k) os << ", ";
        pp_child(e.args[k], 0, os);
      }
      os << ")";
      break;
  }
  if (paren) os << ")";
}

std::string mask_str(MaskPred m) {
  switch (m) {
    case MaskPred::None: return "true";
    case MaskPred::Lt: return "j < i";
    case MaskPred::Le: return "j <= i";
    case MaskPred::Gt: return "j > i";
    case MaskPred::Ge: return "j >= i";
  }
  return "?";
}

std::string show_lit(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Bool: return v.b ? "true" : "false";
    case Value::Kind::Sym: return "'" + v.sym + "'";
    case Value::Kind::Nat: return std::to_string(v.nat);
    case Value::Kind::Str: return "\"" + concat_syms(v.str) + "\"";
  }
  return "?";
}

} // namespace

std::string pretty_expr(const Expr& e) {
  std::ostringstream os;
  pp(e, 0, os);
  return os.str();
}

std::string pretty(const Program& p) {
  std::ostringstream os;
  os << "dialect: "
     << (p.dialect == Dialect::BRASP ? "brasp"
         : p.dialect == Dialect::BRASP_POS ? "brasp_pos" : "srasp")
     << ";\n";
  auto symline = [&](const char* key, const std::vector<Sym>& xs) {
    os << key << ":";
    for (const auto& s : xs) os << " " << s;
    os << ";\n";
  };
  symline("sigma", p.sigma);
  symline("gamma", p.gamma);
  os << "io: ";
  switch (p.convention) {
    case Convention::LengthPreserving: os << "length_preserving"; break;
    case Convention::PackedOutput: os << "packed(" << p.packed_k << ")"; break;
    case Convention::Padded: os << "padded"; break;
  }
  os << ";\n";
  if (p.minlen) os << "minlen: " << p.minlen->show() << ";\n";
  for (const auto& t : p.tables) {
    os << "table " << t.name << " {";
    for (const auto& [k, v] : t.entries) {
      os << " ";
      if (k.size() == 1) os << show_lit(k[0]);
      else {
        os << "(";
        for (size_t a = 0; a < k.size(); ++a) {
          if (a) os << ", ";
          os << show_lit(k[a]);
        }
        os << ")";
      }
      os << " -> " << show_lit(v) << ";";
    }
    if (t.default_value) os << " default -> " << show_lit(*t.default_value) << ";";
    os << " }\n";
  }
  os << "\n";
  for (const auto& d : p.defs) {
    os << d.name << "(i) = ";
    switch (d.kind) {
      case Def::Kind::PositionWise:
        pp(*d.rhs, 0, os);
        break;
      case Def::Kind::Attention: {
        os << (d.attn.choice == Choice::Leftmost ? "leftmost" : "rightmost")
           << " j [" << mask_str(d.attn.mask);
        bool trivial_score = d.attn.score->kind == Expr::Kind::BoolLit && d.attn.score->bval;
        if (!trivial_score) {
          os << ", ";
          pp(*d.attn.score, 0, os);
        }
        os << "] ";
        pp(*d.attn.value, 1, os);
        if (!d.attn.default_omitted && d.attn.default_value) {
          os << " : ";
          pp(*d.attn.default_value, 0, os);
        }
        break;
      }
      case Def::Kind::PrefixSum:
        os << "sum j [j <= i] ";
        pp(*d.psum.value, 1, os);
        break;
    }
    os << ";\n";
  }
  return os.str();
}

} // namespace rasp
