#include "rasp/value.hpp"

#include <algorithm>

namespace rasp {

std::string concat_syms(const SymStr& s) {
  std::string out;
  for (const auto& x : s) out += x;
  return out;
}

std::string show_value(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Bool: return v.b ? "1" : "0";
    case Value::Kind::Sym: return v.sym;
    case Value::Kind::Nat: return std::to_string(v.nat);
    case Value::Kind::Str: return v.str.empty() ? "ε" : concat_syms(v.str);
  }
  return "?";
}

SymStr tokenize(const std::string& text, const std::vector<Sym>& alphabet) {
  SymStr out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t best = 0;
    const Sym* hit = nullptr;
    for (const auto& a : alphabet) {
      if (a.size() > best && text.compare(pos, a.size(), a) == 0) {
        best = a.size();
        hit = &a;
      }
    }
    if (!hit)
      throw std::runtime_error("cannot tokenize input at byte " + std::to_string(pos) +
                               " of \"" + text + "\"");
    out.push_back(*hit);
    pos += best;
  }
  return out;
}

} // namespace rasp
