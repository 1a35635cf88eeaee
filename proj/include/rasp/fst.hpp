#pragma once
// Deterministic finite transducers with an end-marker transition,
// directionality wrappers, pipelines, and the aperiodicity / identity-reset
// decision procedures.

#include "rasp/value.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rasp {

struct Dft {
  std::vector<Sym> sigma; // input alphabet (end-marker excluded)
  std::vector<Sym> gamma; // output alphabet
  int nstates = 1;
  int q0 = 0;
  // delta[q][a] for a = index into sigma; out is a string of gamma symbols.
  struct Edge { SymStr out; int next = 0; };
  std::vector<std::vector<Edge>> delta;
  std::vector<Edge> delta_end; // transition on the end-marker

  int sym_index(const Sym& a) const; // -1 if absent
  void check() const;                // totality / range assertions
};

enum class Dir { L2R, R2L };

struct DirectedDft {
  Dft machine;
  Dir dir = Dir::L2R;
};

struct Pipeline {
  std::vector<DirectedDft> stages;
  // Optional tuple-coordinate metadata for stages produced by lowering:
  // names of the coordinates of the final stage's tuple alphabet, and which
  // coordinate carries the program's out vector.
  std::vector<std::string> final_coords;
  int out_coord = -1;
  // Projection from final tuple symbols to their out-coordinate rendering
  // (filled by the lowering; empty for hand-written pipelines).
  std::map<Sym, Sym> out_projection;
};

SymStr run_dft(const Dft& t, const SymStr& w);
SymStr run_directed(const DirectedDft& t, const SymStr& w);
SymStr run_pipeline(const Pipeline& p, const SymStr& w); // raw final-stage string
// Final-stage string with the out projection applied (lowered pipelines).
SymStr run_pipeline_projected(const Pipeline& p, const SymStr& w);

struct AperiodicityReport {
  bool aperiodic = true;
  SymStr witness; // generator word w with m_w^k != m_w^{k+1} for all k' <= k
  int k = 0;      // minimal such k
};

// Transition-monoid closure with the function-power criterion m^|Q| = m^{|Q|+1}.
AperiodicityReport is_aperiodic(const Dft& t);

// Definitional cross-check used by property tests: enumerate words up to
// `maxlen`, powers up to `maxpow`, and test stabilization of state maps.
bool aperiodic_by_enumeration(const Dft& t, int maxlen, int maxpow);

// True iff every input symbol acts on states as the identity or a constant.
bool is_identity_reset(const Dft& t);

// Text interchange format (states / start / delta lines; see tests for shape).
std::string format_dft(const Dft& t);
std::string format_pipeline(const Pipeline& p);
Dft parse_dft(const std::string& text);
Pipeline parse_pipeline(const std::string& text);

Dft identity_dft(const std::vector<Sym>& alphabet);

} // namespace rasp
