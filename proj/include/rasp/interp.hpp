#pragma once
// Reference evaluator producing full traces, plus the string-level run()
// wrapper handling the three I/O conventions.

#include "rasp/ast.hpp"

#include <map>

namespace rasp {

struct Trace {
  int n = 0;
  // Ordered: `in` first, then `pos` (dialects with positions), then defs.
  std::vector<std::pair<std::string, std::vector<Value>>> rows;
  // (def name, position) pairs where the default of an attention fired.
  std::set<std::pair<std::string, int>> default_taken;

  const std::vector<Value>* row(const std::string& name) const;
};

struct IoInstance {
  SymStr w; // raw input symbols
  int n = 0;
};

struct VectorLengthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MalformedOutput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Default n for a program and input length: |w| (length-preserving / packed)
// or q(|w|)+1 (padded; q(l)=l when no minlen is declared).
int default_n(const TypedProgram& p, int len);
long minlen_q(const TypedProgram& p, long len);

Trace eval(const TypedProgram& p, const IoInstance& io);

// Extract the output string of a trace per the program's convention.
SymStr extract_output(const TypedProgram& p, const Trace& t);

// Tokenize w, pick n (optional), evaluate, extract.
SymStr run(const TypedProgram& p, const std::string& w, int n = -1);
SymStr run(const TypedProgram& p, const SymStr& w, int n = -1);

enum class TraceFormat { Tsv, Markdown };
std::string render_trace(const Trace& t, TraceFormat f);

} // namespace rasp
