#pragma once
// Runtime values and symbol utilities shared by all modules.
//
// A "symbol" is an arbitrary UTF-8 string (usually one character; packed-cell
// symbols and tuple symbols are longer). A Str value is a bounded-length
// sequence of symbols; its concatenation is what packed outputs denote.

#include <string>
#include <vector>
#include <stdexcept>

namespace rasp {

using Sym = std::string;
using SymStr = std::vector<Sym>; // a string *of symbols*, not of bytes

// Unicode open-box, the padding symbol used by padded programs and traces.
inline const Sym PAD = "␣"; // ␣
// End-marker symbol used when transducer constructions need a literal.
inline const Sym ENDMARK = "⊣"; // ⊣

struct Value {
  enum class Kind { Bool, Sym, Nat, Str };
  Kind kind = Kind::Bool;
  bool b = false;
  int nat = 0;
  rasp::Sym sym;
  SymStr str;

  static Value mk_bool(bool v) { Value x; x.kind = Kind::Bool; x.b = v; return x; }
  static Value mk_sym(Sym s) { Value x; x.kind = Kind::Sym; x.sym = std::move(s); return x; }
  static Value mk_nat(int v) { Value x; x.kind = Kind::Nat; x.nat = v; return x; }
  static Value mk_str(SymStr s) { Value x; x.kind = Kind::Str; x.str = std::move(s); return x; }

  bool operator==(const Value& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case Kind::Bool: return b == o.b;
      case Kind::Sym: return sym == o.sym;
      case Kind::Nat: return nat == o.nat;
      case Kind::Str: return str == o.str;
    }
    return false;
  }
  bool operator!=(const Value& o) const { return !(*this == o); }
  bool operator<(const Value& o) const { // total order for use as map keys
    if (kind != o.kind) return static_cast<int>(kind) < static_cast<int>(o.kind);
    switch (kind) {
      case Kind::Bool: return b < o.b;
      case Kind::Sym: return sym < o.sym;
      case Kind::Nat: return nat < o.nat;
      case Kind::Str: return str < o.str;
    }
    return false;
  }
};

// Rendering used by traces and error messages: booleans as 0/1 (table style),
// Str values as their concatenation, the empty string as epsilon.
std::string show_value(const Value& v);
std::string concat_syms(const SymStr& s);

// Greedy longest-match tokenization of raw text into symbols of `alphabet`.
// Throws std::runtime_error naming the offending byte offset on failure.
SymStr tokenize(const std::string& text, const std::vector<Sym>& alphabet);

} // namespace rasp
