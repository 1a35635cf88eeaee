#pragma once
// Exact-arithmetic runtime for masked average-hard-attention transformer
// encoders: positions -1..n-1, FFN and attention layers over rationals,
// position encodings (two modes), input encoding and output decoding.

#include "rasp/value.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rasp {

using Rational = boost::multiprecision::cpp_rational;

enum class PeMode { B, C };

enum class AttnMask { None, StrictFuture, NonstrictFuture };

// Sparse coefficient triple for attention scores / value deliveries.
struct ScoreTerm { int a; int b; Rational c; };   // S(i,j) += c * u_i[a] * u_j[b]
struct ValueTerm { int dst; int src; Rational c; }; // delivers c * u_j[src] into dst

struct FfnUnit {
  Rational bias;                               // b1 component
  std::vector<std::pair<int, Rational>> in;    // W1 row (coord, weight)
  std::vector<std::pair<int, Rational>> out;   // W2 column (dst coord, weight)
};

struct Layer {
  enum class Kind { Ffn, Attn };
  Kind kind = Kind::Ffn;
  // Ffn
  std::vector<FfnUnit> units;
  std::vector<std::pair<int, Rational>> bias2; // b2 (dst coord, value)
  // Attn
  AttnMask mask = AttnMask::None;
  std::vector<ScoreTerm> score;
  std::vector<ValueTerm> value;
  // Debug / instrumentation
  std::string label;
  // Equality-attention instrumentation: coordinates holding v1 (i side) and
  // v2 (j side); -1 when not an equality layer.
  int eq_v1 = -1, eq_v2 = -1;
  AttnMask eq_mask = AttnMask::None; // mask of the source operation
};

struct ActivationSeq {
  int n = 0;           // positions -1 .. n-1 stored at indices 0 .. n
  int d = 0;
  std::vector<std::vector<Rational>> u; // u[pos+1][coord]
  std::vector<std::string> coord_names;

  Rational& at(int pos, int coord) { return u[pos + 1][coord]; }
  const Rational& at(int pos, int coord) const { return u[pos + 1][coord]; }
  int coord(const std::string& name) const; // -1 if absent
};

struct TransformerSpec {
  PeMode mode = PeMode::B;
  int d = 0;
  std::vector<std::string> coord_names; // layout; PE coords are named below
  std::vector<Layer> layers;
  // Input/output bindings: symbol -> one-hot coordinate.
  std::vector<Sym> in_alphabet;
  std::vector<int> in_coords;
  std::vector<Sym> out_alphabet;
  std::vector<int> out_coords;
  std::string program_name;
};

// Names of the built-in position-encoding coordinates.
// Mode B: one, pos, posq, posi, default, zero. Mode C: one, pos, posiq, default, zero.
std::vector<std::string> pe_coord_names(PeMode mode);

// Standalone PE sequence (tests); width = pe_coord_names(mode).size().
ActivationSeq build_pe(int n, PeMode mode);

// Fill the PE coordinates of an existing sequence whose layout contains them.
void fill_pe(ActivationSeq& u, PeMode mode);

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunRecord {
  // Score matrices of layers with record flag (eq instrumentation):
  // per recorded layer: (layer index, S where S[i+1][j+1] = score, mask).
  struct Scores {
    int layer = 0;
    std::vector<std::vector<Rational>> s;
  };
  std::vector<Scores> recorded;
};

ActivationSeq apply_layer(const Layer& l, const ActivationSeq& u,
                          RunRecord* rec = nullptr, int layer_index = 0);
ActivationSeq run(const TransformerSpec& t, const ActivationSeq& u0,
                  RunRecord* rec = nullptr);

ActivationSeq encode_input(const TransformerSpec& t, const SymStr& w, int n);
SymStr decode_output(const TransformerSpec& t, const ActivationSeq& u);

std::string format_transformer(const TransformerSpec& t);
TransformerSpec parse_transformer(const std::string& text);

std::string show_rational(const Rational& r);

} // namespace rasp
