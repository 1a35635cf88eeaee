#pragma once
// Shared internals between desugar and typecheck: lenient type synthesis
// (desugar needs value types to materialize dead defaults before the strict
// checker runs).

#include "rasp/ast.hpp"

#include <map>

namespace rasp::detail {

// Deterministic global symbol order for a program: sigma, gamma, pad,
// end-marker, then literals/tables in textual order. Alphabet sets inside
// SemTypes are kept sorted by this order.
struct SymbolOrder {
  std::map<Sym, int> rank;
  std::vector<Sym> all;
  void add(const Sym& s);
  std::vector<Sym> sorted_union(const std::vector<Sym>& a, const std::vector<Sym>& b) const;
  void sort(std::vector<Sym>& xs) const;
};

SymbolOrder symbol_order(const Program& p);

// Lenient synthesis of a def's value type, given the types of earlier defs.
// Handles undesugared forms (subscripts, neighbor reads, literals >= 2).
// Throws TypeError only for structurally hopeless input.
SemType lenient_type(const Program& p, const SymbolOrder& order,
                     const std::map<std::string, SemType>& env, const Expr& e);

// Dead value of a type: false / first symbol / 0 / empty string.
ExprPtr dead_value(const SemType& t);

} // namespace rasp::detail
