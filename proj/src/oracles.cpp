// Brute-force reference transductions for every corpus program. These are
// written straight from the intended string-level behavior, independently of
// the attention programs, so agreement is meaningful evidence.

#include "rasp/oracle.hpp"

#include <algorithm>
#include <map>

namespace rasp {

namespace {

SymStr oracle_increment(const SymStr& w) {
  // add one to the binary numeral, wrapping on overflow
  SymStr r = w;
  for (int i = static_cast<int>(r.size()) - 1; i >= 0; i--) {
    if (r[i] == "0") {
      r[i] = "1";
      return r;
    }
    r[i] = "0"; // carry keeps moving left
  }
  return r; // all ones: wraps to all zeros
}

SymStr oracle_rotate_right(const SymStr& w) {
  if (w.size() < 2) return w;
  SymStr r;
  r.push_back(w.back());
  r.insert(r.end(), w.begin(), w.end() - 1);
  return r;
}

SymStr apply_hom(const SymStr& w, const std::map<Sym, SymStr>& h) {
  SymStr r;
  for (auto& x : w) {
    const SymStr& img = h.at(x);
    r.insert(r.end(), img.begin(), img.end());
  }
  return r;
}

SymStr oracle_hom_packed(const SymStr& w) {
  return apply_hom(w, {{"a", {"a", "a"}}, {"b", {"c", "c", "b"}}});
}

SymStr oracle_hom_srasp(const SymStr& w) {
  return apply_hom(w, {{"A", {"a", "a"}}, {"B", {}}, {"C", {"c", "c", "d"}}});
}

// split at '|', transform each block, keep the separators where they are
template <class F>
SymStr map_blocks(const SymStr& w, F f) {
  SymStr r;
  SymStr block;
  auto flush = [&] {
    SymStr t = f(block);
    r.insert(r.end(), t.begin(), t.end());
    block.clear();
  };
  for (auto& x : w) {
    if (x == "|") {
      flush();
      r.push_back("|");
    } else {
      block.push_back(x);
    }
  }
  flush();
  return r;
}

SymStr oracle_map_reverse(const SymStr& w) {
  return map_blocks(w, [](SymStr b) {
    std::reverse(b.begin(), b.end());
    return b;
  });
}

SymStr oracle_map_duplicate(const SymStr& w) {
  return map_blocks(w, [](const SymStr& b) {
    SymStr t = b;
    t.insert(t.end(), b.begin(), b.end());
    return t;
  });
}

SymStr oracle_copy_first_half(const SymStr& w) {
  return SymStr(w.begin(), w.begin() + w.size() / 2);
}

SymStr oracle_residues(const SymStr& w, int m) {
  SymStr r;
  for (size_t i = 0; i < w.size(); i++) r.push_back(std::to_string(i % m));
  return r;
}

SymStr oracle_marked_square(const SymStr& w) {
  auto cap = [](const Sym& x) -> Sym { return x == "a" ? "A" : x == "b" ? "B" : x; };
  SymStr r{"|"};
  for (size_t k = 1; k <= w.size(); k++) {
    for (size_t i = 0; i < w.size(); i++) r.push_back(i < k ? cap(w[i]) : w[i]);
    r.push_back("|");
  }
  return r;
}

SymStr oracle_majority(const SymStr& w) {
  long na = std::count(w.begin(), w.end(), "a");
  long nb = std::count(w.begin(), w.end(), "b");
  return SymStr(w.size(), na >= nb ? "a" : "b");
}

SymStr oracle_count_mod3(const SymStr& w, const Sym& one, const Sym& two) {
  SymStr r;
  int c = 0;
  for (auto& x : w) {
    if (x == one) c += 1;
    if (x == two) c += 2;
    c %= 3;
    r.push_back(std::to_string(c));
  }
  return r;
}

SymStr oracle_replace_after_b(const SymStr& w) {
  SymStr r;
  bool seen = false;
  for (auto& x : w) {
    r.push_back(seen ? Sym("c") : x);
    if (x == "b") seen = true;
  }
  return r;
}

SymStr oracle_mark_before_b(const SymStr& w) {
  SymStr r = w;
  bool seen = false;
  for (int i = static_cast<int>(w.size()) - 1; i >= 0; i--) {
    if (seen && w[i] == "a") r[i] = "x";
    if (w[i] == "b") seen = true;
  }
  return r;
}

const std::vector<Oracle>& registry() {
  static const std::vector<Oracle> reg = {
      {"increment", {"0", "1"}, oracle_increment},
      {"rotate-right", {"a", "b", "c"}, oracle_rotate_right},
      {"homomorphism-packed", {"a", "b"}, oracle_hom_packed},
      {"map-reverse", {"a", "b", "c", "d", "e", "|"}, oracle_map_reverse},
      {"map-duplicate", {"a", "b", "c", "d", "e", "|"}, oracle_map_duplicate},
      // the same transductions over the identity packer's smaller alphabet
      {"map-reverse-packed", {"a", "b", "|"}, oracle_map_reverse},
      {"map-duplicate-packed", {"a", "b", "|"}, oracle_map_duplicate},
      {"copy-first-half", {"a", "b", "c"}, oracle_copy_first_half},
      {"residues-mod-2", {"a", "b"}, [](const SymStr& w) { return oracle_residues(w, 2); }},
      {"residues-mod-3", {"a", "b"}, [](const SymStr& w) { return oracle_residues(w, 3); }},
      {"residues-mod-5", {"a", "b"}, [](const SymStr& w) { return oracle_residues(w, 5); }},
      {"homomorphism-srasp", {"A", "B", "C"}, oracle_hom_srasp},
      {"marked-square", {"a", "b"}, oracle_marked_square},
      {"marked-square-corrupt", {"a", "b"}, oracle_marked_square},
      {"majority-rules", {"a", "b"}, oracle_majority},
      {"count-mod-3", {"0", "1", "2"},
       [](const SymStr& w) { return oracle_count_mod3(w, "1", "2"); }},
      {"count-mod-3-acd", {"a", "c", "d"},
       [](const SymStr& w) { return oracle_count_mod3(w, "a", "c"); }},
      {"identity-packer", {"a", "b", "|"}, [](const SymStr& w) { return w; }},
      {"replace-after-b", {"a", "b"}, oracle_replace_after_b},
      {"mark-before-b", {"a", "b"}, oracle_mark_before_b},
  };
  return reg;
}

} // namespace

bool has_oracle(const std::string& name) {
  for (auto& o : registry())
    if (o.name == name) return true;
  return false;
}

const Oracle& find_oracle(const std::string& name) {
  for (auto& o : registry())
    if (o.name == name) return o;
  throw MissingOracle("no reference transduction registered for '" + name + "'");
}

std::vector<std::string> oracle_names() {
  std::vector<std::string> r;
  for (auto& o : registry()) r.push_back(o.name);
  return r;
}

std::vector<SymStr> enumerate_words(const std::vector<Sym>& sigma, int maxlen) {
  std::vector<SymStr> out{{}};
  std::vector<SymStr> prev{{}};
  for (int len = 1; len <= maxlen; len++) {
    std::vector<SymStr> cur;
    cur.reserve(prev.size() * sigma.size());
    for (auto& w : prev)
      for (auto& a : sigma) {
        SymStr x = w;
        x.push_back(a);
        cur.push_back(std::move(x));
      }
    out.insert(out.end(), cur.begin(), cur.end());
    prev = std::move(cur);
  }
  return out;
}

std::string source_path(const std::string& rel) {
  return std::string(RASP_SOURCE_DIR) + "/" + rel;
}

} // namespace rasp
