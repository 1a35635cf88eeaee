#pragma once
// AST for the three dialects (B-RASP, B-RASP[pos], S-RASP), plus the
// program-level metadata carried by .rasp files.

#include "rasp/value.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rasp {

enum class Dialect { BRASP, BRASP_POS, SRASP };

enum class Convention { LengthPreserving, PackedOutput, Padded };

// Mask predicates available to attention operations.
enum class MaskPred { None, Lt, Le, Gt, Ge }; // true, j<i, j<=i, j>i, j>=i

enum class Choice { Leftmost, Rightmost };

struct SemType {
  enum class Kind { Bool, Sym, Nat, Str };
  Kind kind = Kind::Bool;
  // Sym: the set of symbols the expression can evaluate to (sorted by the
  // program's global symbol order). Str: base alphabet plus length bound.
  std::vector<Sym> alphabet;
  int k = 0; // Str bound

  static SemType boolean() { return SemType{Kind::Bool, {}, 0}; }
  static SemType nat() { return SemType{Kind::Nat, {}, 0}; }
  static SemType sym(std::vector<Sym> a) { return SemType{Kind::Sym, std::move(a), 0}; }
  static SemType str(std::vector<Sym> a, int k) { return SemType{Kind::Str, std::move(a), k}; }
  bool operator==(const SemType& o) const {
    return kind == o.kind && alphabet == o.alphabet && k == o.k;
  }
};

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  enum class Kind {
    BoolLit,  // bval
    SymLit,   // sym
    NatLit,   // ival (parse accepts any m >= 0; desugar reduces to 0/1 chains)
    StrLit,   // strv (packed cell literal, possibly empty)
    Read,     // name(var) or name(var+offset) or name(index expr) pre-desugar
    Not, And, Or,          // args
    IfElse,                // args = {then, cond, else}  (e1 if c else e2)
    Cmp,                   // args = {lhs, rhs}, rel
    Add, Sub,              // args = {lhs, rhs}
    Concat,                // args = {lhs, rhs}
    Apply,                 // name = table, args = operands
  };
  enum class Rel { Eq, Ne, Lt, Le, Gt, Ge };

  Kind kind;
  bool bval = false;
  int ival = 0;
  Sym sym;
  SymStr strv;
  std::string name;  // Read: vector name; Apply: table name
  char var = 'i';    // Read: bound variable ('i' or 'j')
  int offset = 0;    // Read: -1/0/+1 neighbor sugar
  ExprPtr index;     // Read: subscript sugar v(e); null for plain reads
  Rel rel = Rel::Eq;
  std::vector<ExprPtr> args;

  // Filled by the typechecker.
  std::optional<SemType> type;
};

ExprPtr mk_bool_lit(bool v);
ExprPtr mk_sym_lit(Sym s);
ExprPtr mk_nat_lit(int v);
ExprPtr mk_str_lit(SymStr s);
ExprPtr mk_read(std::string name, char var, int offset = 0);
ExprPtr mk_read_index(std::string name, ExprPtr index);
ExprPtr mk_un(Expr::Kind k, ExprPtr a);
ExprPtr mk_bin(Expr::Kind k, ExprPtr a, ExprPtr b);
ExprPtr mk_cmp(Expr::Rel rel, ExprPtr a, ExprPtr b);
ExprPtr mk_ifelse(ExprPtr then_e, ExprPtr cond, ExprPtr else_e);
ExprPtr mk_apply(std::string table, std::vector<ExprPtr> args);
ExprPtr clone_expr(const ExprPtr& e);

struct Attention {
  Choice choice = Choice::Leftmost;
  MaskPred mask = MaskPred::None;
  ExprPtr score;            // FV ⊆ {i,j}
  ExprPtr value;            // FV ⊆ {j}
  ExprPtr default_value;    // FV ⊆ {i}; null when omitted in the source
  bool default_omitted = false; // the source omitted ":" and a dead value was filled in
};

struct PrefixSum {
  ExprPtr value; // FV ⊆ {j}; mask fixed to j<=i
};

struct Def {
  enum class Kind { PositionWise, Attention, PrefixSum };
  Kind kind = Kind::PositionWise;
  std::string name;
  char var = 'i';
  ExprPtr rhs;        // PositionWise
  Attention attn;     // Attention
  PrefixSum psum;     // PrefixSum
  std::optional<SemType> type; // filled by typecheck
};

struct Table {
  std::string name;
  // Every key tuple has the same arity; default_value used when no key matches.
  std::vector<std::pair<std::vector<Value>, Value>> entries;
  std::optional<Value> default_value;
  // Filled by typecheck:
  std::vector<SemType> arg_types;
  std::optional<SemType> result_type;
};

// Minimum-vector-length expression in l (affine/quadratic polynomials plus max).
struct MinLen {
  enum class Kind { Var, Lit, Add, Mul, Max };
  Kind kind = Kind::Lit;
  long lit = 0;
  std::shared_ptr<MinLen> a, b;
  long eval(long l) const;
  std::string show() const;
  static MinLen var();
  static MinLen lit_(long v);
  static MinLen add(MinLen x, MinLen y);
  static MinLen mul(MinLen x, MinLen y);
  static MinLen max_(MinLen x, MinLen y);
  static MinLen substitute(const MinLen& outer, const MinLen& inner); // outer[l := inner]
};

struct Program {
  Dialect dialect = Dialect::BRASP;
  Convention convention = Convention::LengthPreserving;
  int packed_k = 0; // PackedOutput bound
  std::vector<Sym> sigma; // declared input alphabet (pad not included)
  std::vector<Sym> gamma; // declared output alphabet (pad not included)
  std::optional<MinLen> minlen;
  std::vector<Table> tables;
  std::vector<Def> defs;
  std::string name; // file stem; used for oracle lookup and error messages

  const Table* find_table(const std::string& n) const;
  const Def* find_def(const std::string& n) const;
  int def_index(const std::string& n) const; // -1 if absent

  // Alphabet of the predefined `in` vector (pad appended under Padded).
  std::vector<Sym> in_alphabet() const;
  // Alphabet the `out` vector must stay within.
  std::vector<Sym> out_alphabet() const;
  bool has_pos() const { return dialect != Dialect::BRASP; }
};

// A Program that passed typecheck (types annotated in place).
struct TypedProgram : Program {};

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg), line(line_), col(col_) {}
};

struct TypeError : std::runtime_error {
  std::string def_name;
  TypeError(std::string def, const std::string& reason)
      : std::runtime_error("in def '" + def + "': " + reason), def_name(std::move(def)) {}
};

} // namespace rasp
