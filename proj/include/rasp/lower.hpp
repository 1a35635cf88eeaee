#pragma once
// Program <-> transducer and program -> program constructions:
// score normalization, compilation to aperiodic pipelines, identity-reset
// cascade composition, the map-reverse / map-duplicate packed compositions,
// padded composition, homomorphism programs, and unpacking.

#include "rasp/ast.hpp"
#include "rasp/fst.hpp"
#include "rasp/interp.hpp"

namespace rasp {

struct UnnormalizedScore : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotIdentityReset : std::runtime_error {
  int stage;
  NotIdentityReset(int s)
      : std::runtime_error("cascade stage " + std::to_string(s) +
                           " is not an identity-reset transducer"),
        stage(s) {}
};
struct CascadeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rewrite every attention so its score reads vectors at j only (DNF over
// i-atoms x j-atoms, one attention per i-profile, position-wise select).
TypedProgram normalize_scores(const TypedProgram& p);

// Thm-style compilation of a (normalized) B-RASP program into a pipeline of
// aperiodic transducers over growing tuple alphabets. The final stage's tuple
// has one coordinate per non-alias def; Pipeline::out_projection renders the
// out coordinate.
Pipeline brasp_to_pipeline(const TypedProgram& p);

struct PipelineAperiodicityReport {
  bool all_aperiodic = true;
  std::vector<std::pair<int, AperiodicityReport>> failures; // stage index
};
PipelineAperiodicityReport check_pipeline_aperiodic(const Pipeline& pl);

// A cascade: 2-state identity-reset directed transducers, chained.
struct Cascade {
  std::vector<DirectedDft> stages;
};

// Append, for each stage, the state/sym/out definition block computing
// stage∘...∘stage∘base over packed cells. Base must have packed outputs.
TypedProgram cascade_to_brasp(const TypedProgram& base, const Cascade& c);

// f = fR ∘ fL with user-supplied cascade decompositions (checked by
// enumeration up to length 6 against the machines).
TypedProgram arational_to_brasp(const DirectedDft& fL, const DirectedDft& fR,
                                const Cascade& cL, const Cascade& cR);

// Packed-composition lemmas: append the block computing map-reverse ∘ P /
// map-duplicate ∘ P to a packed program over Γ ∪ {|}.
TypedProgram compose_mapreverse(const TypedProgram& p);
TypedProgram compose_mapduplicate(const TypedProgram& p);

// Padded composition: run p2 on p1's output; q3(l) = max(q1(l), q2(q1(l))).
TypedProgram srasp_compose(const TypedProgram& p1, const TypedProgram& p2);

// Homomorphism h: Σ -> Γ* as a padded program with q(l) = K l, K = max |h(a)|.
TypedProgram hom_to_srasp(const std::map<Sym, SymStr>& h,
                          const std::vector<Sym>& sigma,
                          const std::vector<Sym>& gamma,
                          const std::string& name = "hom");

// Reinterpret a packed program's cells as symbols and compose with the
// identity-on-strings homomorphism; the result is a padded program.
TypedProgram unpack_packed(const TypedProgram& p);

} // namespace rasp
