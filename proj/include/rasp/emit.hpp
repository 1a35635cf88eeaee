#pragma once
// Compiler from padded (S-RASP) typed programs to transformer specs, in both
// position-encoding modes.

#include "rasp/aha.hpp"
#include "rasp/ast.hpp"
#include "rasp/interp.hpp"

namespace rasp {

struct UnsupportedConstruct : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rewrite defs with past masks (j>i, j>=i) into future-masked equivalents
// using index reversal; the result is interpreter-equivalent.
TypedProgram lower_past_masks(const TypedProgram& p);

TransformerSpec compile_to_transformer(const TypedProgram& p, PeMode mode);

// End-to-end helper mirroring interp::run through the transformer backend.
SymStr run_transformer(const TransformerSpec& t, const SymStr& w, int n,
                       RunRecord* rec = nullptr);

// Margin check: for every recorded equality-attention layer, the minimum score
// over matching candidates strictly exceeds the maximum over the rest.
// Returns an empty string when sound, else a description of the violation.
std::string check_eq_margins(const TransformerSpec& t, const ActivationSeq& u0,
                             const RunRecord& rec);

} // namespace rasp
