#pragma once
// Brute-force reference transductions (ground truth for equivalence testing)
// and the cross-backend verifier.

#include "rasp/ast.hpp"
#include "rasp/interp.hpp"

#include <functional>
#include <optional>

namespace rasp {

struct Oracle {
  std::string name;
  std::vector<Sym> sigma;
  std::function<SymStr(const SymStr&)> fn;
};

struct MissingOracle : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Registry of the corpus oracles, keyed by program name.
const Oracle& find_oracle(const std::string& name);
bool has_oracle(const std::string& name);
std::vector<std::string> oracle_names();

// Enumerate all words over `sigma` with length <= maxlen, shortest first,
// lexicographic within a length (alphabet order).
std::vector<SymStr> enumerate_words(const std::vector<Sym>& sigma, int maxlen);

// Absolute path helpers into the source tree (corpus files, goldens).
std::string source_path(const std::string& rel);

enum class Backend { Oracle, Fst, Aha, All };

struct VerifyOptions {
  Backend against = Backend::Oracle;
  int maxlen = 6;
  std::vector<int> n_offsets = {1, 2}; // padded n = q(l)+offset
  bool both_pe_modes = true;
  bool check_margins = true;
};

struct VerifyResult {
  bool pass = true;
  long checked = 0;
  std::string counterexample; // first failing w (token-joined), empty if pass
  std::string detail;
  std::vector<std::string> log;
};

VerifyResult verify_program(const TypedProgram& p, const VerifyOptions& opt);

} // namespace rasp
