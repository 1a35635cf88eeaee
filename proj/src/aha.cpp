// Exact rational runtime for masked average-hard-attention encoders.
// Positions -1..n-1 live at indices 0..n of the activation matrix; the
// extra position -1 carries no input symbol and is the delivery point for
// attention defaults.

#include "rasp/aha.hpp"

#include <algorithm>
#include <sstream>

namespace rasp {

int ActivationSeq::coord(const std::string& name) const {
  for (size_t k = 0; k < coord_names.size(); k++)
    if (coord_names[k] == name) return (int)k;
  return -1;
}

std::vector<std::string> pe_coord_names(PeMode mode) {
  if (mode == PeMode::B)
    return {"one", "pos", "posq", "posi", "default", "zero"};
  return {"one", "pos", "posiq", "default", "zero"};
}

void fill_pe(ActivationSeq& u, PeMode mode) {
  if (u.n <= 0) throw DimensionMismatch("position encoding needs n >= 1");
  auto need = [&](const std::string& name) {
    int c = u.coord(name);
    if (c < 0) throw DimensionMismatch("layout lacks the '" + name + "' coordinate");
    return c;
  };
  int one = need("one"), pos = need("pos");
  int dflt = need("default"), zero = need("zero");
  int posq = mode == PeMode::B ? need("posq") : -1;
  int posi = mode == PeMode::B ? need("posi") : -1;
  int posiq = mode == PeMode::C ? need("posiq") : -1;
  for (int p = -1; p < u.n; p++) {
    u.at(p, one) = 1;
    u.at(p, pos) = Rational(p) / u.n;
    u.at(p, dflt) = p == -1 ? 1 : 0;
    u.at(p, zero) = p == 0 ? 1 : 0;
    if (posq >= 0) u.at(p, posq) = u.at(p, pos) * u.at(p, pos);
    if (posi >= 0) u.at(p, posi) = Rational(1) / (p + 2);
    if (posiq >= 0) u.at(p, posiq) = Rational(1) / ((p + 2) * (p + 2));
  }
}

ActivationSeq build_pe(int n, PeMode mode) {
  ActivationSeq u;
  u.n = n;
  u.coord_names = pe_coord_names(mode);
  u.d = (int)u.coord_names.size();
  u.u.assign(n + 1, std::vector<Rational>(u.d, Rational(0)));
  fill_pe(u, mode);
  return u;
}

namespace {

ActivationSeq apply_ffn(const Layer& l, const ActivationSeq& u) {
  ActivationSeq out = u;
  for (int p = -1; p < u.n; p++) {
    for (const auto& unit : l.units) {
      Rational h = unit.bias;
      for (const auto& [c, w] : unit.in) h += w * u.at(p, c);
      if (h > 0)
        for (const auto& [dc, w] : unit.out) out.at(p, dc) += w * h;
    }
    for (const auto& [dc, v] : l.bias2) out.at(p, dc) += v;
  }
  return out;
}

ActivationSeq apply_attn(const Layer& l, const ActivationSeq& u, RunRecord* rec,
                         int layer_index) {
  ActivationSeq out = u;
  int n = u.n;
  bool record = rec && l.eq_v1 >= 0;
  RunRecord::Scores scores;
  if (record) {
    scores.layer = layer_index;
    scores.s.assign(n + 1, std::vector<Rational>(n + 1, Rational(0)));
  }
  auto score_at = [&](int i, int j) {
    Rational s = 0;
    for (const auto& t : l.score) s += t.c * u.at(i, t.a) * u.at(j, t.b);
    return s;
  };
  for (int i = -1; i < n; i++) {
    int hi = n - 1;
    if (l.mask == AttnMask::StrictFuture) hi = i - 1;
    if (l.mask == AttnMask::NonstrictFuture) hi = i;
    if (record)
      for (int j = -1; j < n; j++) scores.s[i + 1][j + 1] = score_at(i, j);
    // exact argmax over the candidate set; empty set (strict mask at the
    // default position) leaves the row unchanged
    std::vector<int> argmax;
    Rational best;
    for (int j = -1; j <= hi; j++) {
      Rational s = record ? scores.s[i + 1][j + 1] : score_at(i, j);
      if (argmax.empty() || s > best) {
        best = s;
        argmax.assign(1, j);
      } else if (s == best) {
        argmax.push_back(j);
      }
    }
    if (argmax.empty()) continue;
    for (const auto& t : l.value) {
      Rational acc = 0;
      for (int j : argmax) acc += t.c * u.at(j, t.src);
      out.at(i, t.dst) += acc / Rational((int)argmax.size());
    }
  }
  if (record) rec->recorded.push_back(std::move(scores));
  return out;
}

} // namespace

ActivationSeq apply_layer(const Layer& l, const ActivationSeq& u, RunRecord* rec,
                          int layer_index) {
  for (const auto& unit : l.units)
    for (const auto& [c, w] : unit.in)
      if (c < 0 || c >= u.d) throw DimensionMismatch("ffn reads coordinate out of range");
  for (const auto& t : l.score)
    if (t.a < 0 || t.a >= u.d || t.b < 0 || t.b >= u.d)
      throw DimensionMismatch("score term out of range");
  if (l.kind == Layer::Kind::Ffn) return apply_ffn(l, u);
  return apply_attn(l, u, rec, layer_index);
}

ActivationSeq run(const TransformerSpec& t, const ActivationSeq& u0, RunRecord* rec) {
  if (u0.d != t.d)
    throw DimensionMismatch("activation width " + std::to_string(u0.d) +
                            " does not match the spec's " + std::to_string(t.d));
  ActivationSeq u = u0;
  for (size_t k = 0; k < t.layers.size(); k++)
    u = apply_layer(t.layers[k], u, rec, (int)k);
  return u;
}

ActivationSeq encode_input(const TransformerSpec& t, const SymStr& w, int n) {
  if ((int)w.size() > n)
    throw DimensionMismatch("input of length " + std::to_string(w.size()) +
                            " does not fit in " + std::to_string(n) + " positions");
  ActivationSeq u;
  u.n = n;
  u.d = t.d;
  u.coord_names = t.coord_names;
  u.u.assign(n + 1, std::vector<Rational>(t.d, Rational(0)));
  for (int p = 0; p < n; p++) {
    const Sym& s = p < (int)w.size() ? w[p] : PAD;
    auto it = std::find(t.in_alphabet.begin(), t.in_alphabet.end(), s);
    if (it == t.in_alphabet.end())
      throw DecodeError("input symbol '" + s + "' is not in the alphabet");
    u.at(p, t.in_coords[it - t.in_alphabet.begin()]) = 1;
  }
  fill_pe(u, t.mode);
  return u;
}

SymStr decode_output(const TransformerSpec& t, const ActivationSeq& u) {
  SymStr out;
  for (int p = 0; p < u.n; p++) {
    int hit = -1;
    for (size_t k = 0; k < t.out_coords.size(); k++) {
      const Rational& v = u.at(p, t.out_coords[k]);
      if (v == 1) {
        if (hit >= 0)
          throw DecodeError("output block at position " + std::to_string(p) +
                            " is hot in both '" + t.out_alphabet[hit] + "' and '" +
                            t.out_alphabet[k] + "'");
        hit = (int)k;
      } else if (v != 0) {
        throw DecodeError("output coordinate '" + t.out_alphabet[k] +
                          "' at position " + std::to_string(p) + " is " +
                          show_rational(v) + ", not 0/1");
      }
    }
    if (hit < 0)
      throw DecodeError("output block at position " + std::to_string(p) +
                        " is all zero");
    out.push_back(t.out_alphabet[hit]);
  }
  return out;
}

// ---- serialization ---------------------------------------------------------

std::string show_rational(const Rational& r) {
  auto num = numerator(r);
  auto den = denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

namespace {

Rational read_rational(const std::string& s) {
  auto slash = s.find('/');
  using Int = boost::multiprecision::cpp_int;
  try {
    if (slash == std::string::npos) return Rational(Int(s));
    return Rational(Int(s.substr(0, slash)), Int(s.substr(slash + 1)));
  } catch (const std::exception&) {
    throw std::runtime_error("transformer parse: bad rational '" + s + "'");
  }
}

const char* mask_word(AttnMask m) {
  switch (m) {
    case AttnMask::None: return "none";
    case AttnMask::StrictFuture: return "strict";
    case AttnMask::NonstrictFuture: return "nonstrict";
  }
  return "none";
}

AttnMask read_mask(const std::string& w) {
  if (w == "none") return AttnMask::None;
  if (w == "strict") return AttnMask::StrictFuture;
  if (w == "nonstrict") return AttnMask::NonstrictFuture;
  throw std::runtime_error("transformer parse: bad mask '" + w + "'");
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> toks;
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

// Remainder of the line after `k` whitespace-separated tokens.
std::string rest_after(const std::string& line, size_t k) {
  size_t p = 0;
  for (size_t t = 0; t < k; t++) {
    while (p < line.size() && isspace((unsigned char)line[p])) p++;
    while (p < line.size() && !isspace((unsigned char)line[p])) p++;
  }
  while (p < line.size() && isspace((unsigned char)line[p])) p++;
  return line.substr(p);
}

} // namespace

std::string format_transformer(const TransformerSpec& t) {
  std::ostringstream os;
  os << "transformer\n";
  os << "mode " << (t.mode == PeMode::B ? "B" : "C") << "\n";
  os << "program " << t.program_name << "\n";
  os << "dim " << t.d << "\n";
  for (int k = 0; k < t.d; k++) os << "coord " << k << " " << t.coord_names[k] << "\n";
  for (size_t k = 0; k < t.in_alphabet.size(); k++)
    os << "in " << t.in_coords[k] << " " << t.in_alphabet[k] << "\n";
  for (size_t k = 0; k < t.out_alphabet.size(); k++)
    os << "out " << t.out_coords[k] << " " << t.out_alphabet[k] << "\n";
  os << "layers " << t.layers.size() << "\n";
  for (const auto& l : t.layers) {
    if (l.kind == Layer::Kind::Ffn) {
      os << "layer ffn";
      if (!l.label.empty()) os << " " << l.label;
      os << "\n";
      for (const auto& u : l.units) {
        os << "unit " << show_rational(u.bias) << " |";
        for (const auto& [c, w] : u.in) os << " " << c << " " << show_rational(w);
        os << " |";
        for (const auto& [c, w] : u.out) os << " " << c << " " << show_rational(w);
        os << "\n";
      }
      if (!l.bias2.empty()) {
        os << "bias2";
        for (const auto& [c, w] : l.bias2) os << " " << c << " " << show_rational(w);
        os << "\n";
      }
    } else {
      os << "layer attn " << mask_word(l.mask);
      if (!l.label.empty()) os << " " << l.label;
      os << "\n";
      if (l.eq_v1 >= 0)
        os << "eq " << l.eq_v1 << " " << l.eq_v2 << " " << mask_word(l.eq_mask) << "\n";
      for (const auto& s : l.score)
        os << "score " << s.a << " " << s.b << " " << show_rational(s.c) << "\n";
      for (const auto& v : l.value)
        os << "value " << v.dst << " " << v.src << " " << show_rational(v.c) << "\n";
    }
    os << "end\n";
  }
  return os.str();
}

TransformerSpec parse_transformer(const std::string& text) {
  TransformerSpec t;
  std::istringstream is(text);
  std::string line;
  auto fail = [](const std::string& why) -> void {
    throw std::runtime_error("transformer parse: " + why);
  };
  if (!std::getline(is, line) || line != "transformer")
    fail("missing 'transformer' header");
  Layer* cur = nullptr;
  size_t declared_layers = 0;
  while (std::getline(is, line)) {
    std::vector<std::string> toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string& key = toks[0];
    if (cur) {
      if (key == "end") {
        cur = nullptr;
      } else if (key == "unit" && cur->kind == Layer::Kind::Ffn) {
        if (toks.size() < 3) fail("short unit line");
        FfnUnit u;
        u.bias = read_rational(toks[1]);
        size_t k = 2;
        if (toks[k] != "|") fail("unit line lacks separators");
        std::vector<std::pair<int, Rational>>* block = &u.in;
        for (k++; k < toks.size(); k++) {
          if (toks[k] == "|") {
            block = &u.out;
            continue;
          }
          if (k + 1 >= toks.size()) fail("dangling coordinate in unit line");
          block->push_back({std::stoi(toks[k]), read_rational(toks[k + 1])});
          k++;
        }
        cur->units.push_back(std::move(u));
      } else if (key == "bias2" && cur->kind == Layer::Kind::Ffn) {
        for (size_t k = 1; k + 1 < toks.size(); k += 2)
          cur->bias2.push_back({std::stoi(toks[k]), read_rational(toks[k + 1])});
      } else if (key == "eq" && cur->kind == Layer::Kind::Attn) {
        if (toks.size() != 4) fail("bad eq line");
        cur->eq_v1 = std::stoi(toks[1]);
        cur->eq_v2 = std::stoi(toks[2]);
        cur->eq_mask = read_mask(toks[3]);
      } else if (key == "score" && cur->kind == Layer::Kind::Attn) {
        if (toks.size() != 4) fail("bad score line");
        cur->score.push_back({std::stoi(toks[1]), std::stoi(toks[2]), read_rational(toks[3])});
      } else if (key == "value" && cur->kind == Layer::Kind::Attn) {
        if (toks.size() != 4) fail("bad value line");
        cur->value.push_back({std::stoi(toks[1]), std::stoi(toks[2]), read_rational(toks[3])});
      } else {
        fail("unexpected '" + key + "' inside a layer");
      }
      continue;
    }
    if (key == "mode") {
      if (toks.size() != 2 || (toks[1] != "B" && toks[1] != "C")) fail("bad mode line");
      t.mode = toks[1] == "B" ? PeMode::B : PeMode::C;
    } else if (key == "program") {
      t.program_name = rest_after(line, 1);
    } else if (key == "dim") {
      if (toks.size() != 2) fail("bad dim line");
      t.d = std::stoi(toks[1]);
    } else if (key == "coord") {
      if (toks.size() < 3) fail("bad coord line");
      int idx = std::stoi(toks[1]);
      if (idx != (int)t.coord_names.size()) fail("coords out of order");
      t.coord_names.push_back(rest_after(line, 2));
    } else if (key == "in") {
      if (toks.size() < 3) fail("bad in line");
      t.in_coords.push_back(std::stoi(toks[1]));
      t.in_alphabet.push_back(rest_after(line, 2));
    } else if (key == "out") {
      if (toks.size() < 3) fail("bad out line");
      t.out_coords.push_back(std::stoi(toks[1]));
      t.out_alphabet.push_back(rest_after(line, 2));
    } else if (key == "layers") {
      if (toks.size() != 2) fail("bad layers line");
      declared_layers = (size_t)std::stoul(toks[1]);
    } else if (key == "layer") {
      if (toks.size() < 2) fail("bad layer line");
      Layer l;
      if (toks[1] == "ffn") {
        l.kind = Layer::Kind::Ffn;
        l.label = rest_after(line, 2);
      } else if (toks[1] == "attn") {
        if (toks.size() < 3) fail("attn layer lacks a mask");
        l.kind = Layer::Kind::Attn;
        l.mask = read_mask(toks[2]);
        l.label = rest_after(line, 3);
      } else {
        fail("unknown layer kind '" + toks[1] + "'");
      }
      t.layers.push_back(std::move(l));
      cur = &t.layers.back();
    } else {
      fail("unknown directive '" + key + "'");
    }
  }
  if (cur) fail("unterminated layer");
  if ((int)t.coord_names.size() != t.d) fail("coord count does not match dim");
  if (t.layers.size() != declared_layers) fail("layer count does not match header");
  return t;
}

} // namespace rasp
