#pragma once
// Parsing, pretty-printing, desugaring and typechecking.

#include "rasp/ast.hpp"

namespace rasp {

// Parse .rasp source text. `name` becomes Program::name (usually the file stem).
Program parse(const std::string& text, const std::string& name = "");
Program parse_file(const std::string& path);

std::string pretty(const Program& p);
std::string pretty_expr(const Expr& e);

// Expand subscript reads v(e(i)), neighbor reads v(i±1), omitted defaults and
// nat literals >= 2 into core forms. Idempotent.
Program desugar(const Program& p);

// Dialect-aware typecheck; annotates types in place. Throws TypeError.
TypedProgram typecheck(const Program& p);

// Convenience: parse + desugar + typecheck.
TypedProgram load_program(const std::string& path);
TypedProgram load_program_text(const std::string& text, const std::string& name = "");

// Free variables of an expression ({'i'}, {'j'} or both).
std::set<char> free_vars(const Expr& e);

} // namespace rasp
