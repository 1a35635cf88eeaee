#include "rasp/fst.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rasp {

int Dft::sym_index(const Sym& a) const {
  for (size_t k = 0; k < sigma.size(); k++)
    if (sigma[k] == a) return (int)k;
  return -1;
}

void Dft::check() const {
  if (nstates <= 0) throw std::runtime_error("transducer needs at least one state");
  if (q0 < 0 || q0 >= nstates) throw std::runtime_error("start state out of range");
  if ((int)delta.size() != nstates || (int)delta_end.size() != nstates)
    throw std::runtime_error("transition table must cover every state");
  for (auto& row : delta) {
    if (row.size() != sigma.size())
      throw std::runtime_error("transition table must cover every input symbol");
    for (auto& e : row)
      if (e.next < 0 || e.next >= nstates)
        throw std::runtime_error("transition target out of range");
  }
  for (auto& e : delta_end)
    if (e.next < 0 || e.next >= nstates)
      throw std::runtime_error("end transition target out of range");
}

SymStr run_dft(const Dft& t, const SymStr& w) {
  int q = t.q0;
  SymStr out;
  for (auto& a : w) {
    int k = t.sym_index(a);
    if (k < 0) throw std::runtime_error("symbol '" + a + "' not in machine alphabet");
    const Dft::Edge& e = t.delta[q][k];
    out.insert(out.end(), e.out.begin(), e.out.end());
    q = e.next;
  }
  const Dft::Edge& e = t.delta_end[q];
  out.insert(out.end(), e.out.begin(), e.out.end());
  return out;
}

SymStr run_directed(const DirectedDft& t, const SymStr& w) {
  if (t.dir == Dir::L2R) return run_dft(t.machine, w);
  SymStr r(w.rbegin(), w.rend());
  SymStr o = run_dft(t.machine, r);
  return SymStr(o.rbegin(), o.rend());
}

SymStr run_pipeline(const Pipeline& p, const SymStr& w) {
  SymStr cur = w;
  for (auto& s : p.stages) cur = run_directed(s, cur);
  return cur;
}

SymStr run_pipeline_projected(const Pipeline& p, const SymStr& w) {
  SymStr raw = run_pipeline(p, w);
  if (p.out_projection.empty()) return raw;
  SymStr out;
  for (auto& s : raw) {
    auto it = p.out_projection.find(s);
    Sym r = it == p.out_projection.end() ? s : it->second;
    if (!r.empty()) out.push_back(r); // empty projection drops the cell
  }
  return out;
}

namespace {

using StateMap = std::vector<int>;

StateMap chain(const StateMap& f, const StateMap& g) { // f first, then g
  StateMap h(f.size());
  for (size_t q = 0; q < f.size(); q++) h[q] = g[f[q]];
  return h;
}

StateMap power(const StateMap& f, int k) {
  StateMap acc(f.size());
  for (size_t q = 0; q < f.size(); q++) acc[q] = (int)q;
  for (int t = 0; t < k; t++) acc = chain(acc, f);
  return acc;
}

StateMap symbol_map(const Dft& t, int a) {
  StateMap m(t.nstates);
  for (int q = 0; q < t.nstates; q++) m[q] = t.delta[q][a].next;
  return m;
}

StateMap word_map(const Dft& t, const SymStr& w) {
  StateMap m(t.nstates);
  for (int q = 0; q < t.nstates; q++) m[q] = q;
  for (auto& a : w) {
    int k = t.sym_index(a);
    if (k < 0) throw std::runtime_error("symbol '" + a + "' not in machine alphabet");
    m = chain(m, symbol_map(t, k));
  }
  return m;
}

} // namespace

AperiodicityReport is_aperiodic(const Dft& t) {
  t.check();
  // Transition monoid closure over the input symbols (the end-marker acts only
  // once and does not participate in powers of words).
  std::map<StateMap, SymStr> seen;
  std::vector<StateMap> queue;
  std::vector<StateMap> gens;
  for (size_t a = 0; a < t.sigma.size(); a++) {
    StateMap m = symbol_map(t, (int)a);
    if (seen.emplace(m, SymStr{t.sigma[a]}).second) queue.push_back(m);
    gens.push_back(m);
  }
  for (size_t head = 0; head < queue.size(); head++) {
    StateMap cur = queue[head];
    SymStr curw = seen[cur];
    for (size_t a = 0; a < gens.size(); a++) {
      StateMap nx = chain(cur, gens[a]);
      SymStr nw = curw;
      nw.push_back(t.sigma[a]);
      if (seen.emplace(nx, nw).second) queue.push_back(nx);
    }
  }
  for (auto& [m, w] : seen) {
    StateMap p = power(m, t.nstates);
    if (p != chain(p, m)) {
      // Non-aperiodic element: locate the start of its power cycle.
      int k = 1;
      StateMap f = m;
      while (true) {
        StateMap g = f;
        bool recurs = false;
        for (int step = 0; step < t.nstates + 1; step++) {
          g = chain(g, m);
          if (g == f) { recurs = true; break; }
        }
        if (recurs) break;
        f = chain(f, m);
        k++;
      }
      return AperiodicityReport{false, w, k};
    }
  }
  return AperiodicityReport{true, {}, t.nstates};
}

bool aperiodic_by_enumeration(const Dft& t, int maxlen, int maxpow) {
  std::vector<SymStr> words = {{}};
  for (int len = 1; len <= maxlen; len++) {
    std::vector<SymStr> next;
    for (auto& w : words)
      if ((int)w.size() == len - 1)
        for (auto& a : t.sigma) {
          SymStr x = w;
          x.push_back(a);
          next.push_back(x);
        }
    for (auto& w : next) words.push_back(w);
  }
  for (auto& w : words) {
    if (w.empty()) continue;
    StateMap m = word_map(t, w);
    bool stable = false;
    for (int k = 1; k <= maxpow; k++) {
      StateMap p = power(m, k);
      if (p == chain(p, m)) { stable = true; break; }
    }
    if (!stable) return false;
  }
  return true;
}

bool is_identity_reset(const Dft& t) {
  for (size_t a = 0; a < t.sigma.size(); a++) {
    StateMap m = symbol_map(t, (int)a);
    bool ident = true, constant = true;
    for (int q = 0; q < t.nstates; q++) {
      if (m[q] != q) ident = false;
      if (m[q] != m[0]) constant = false;
    }
    if (!ident && !constant) return false;
  }
  return true;
}

namespace {

std::string quote_out(const SymStr& s) {
  std::string r = "\"";
  for (auto& x : s) r += x;
  return r + "\"";
}

std::string join_syms(const std::vector<Sym>& xs) {
  std::string r;
  for (size_t k = 0; k < xs.size(); k++) {
    if (k) r += ' ';
    r += xs[k];
  }
  return r;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<Sym> split_ws(const std::string& s) {
  std::vector<Sym> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

struct LineReader {
  std::vector<std::string> lines;
  size_t at = 0;
  explicit LineReader(const std::string& text) {
    std::istringstream is(text);
    std::string l;
    while (std::getline(is, l)) {
      l = trim(l);
      if (!l.empty() && l[0] != '#') lines.push_back(l);
    }
  }
  bool done() const { return at >= lines.size(); }
  const std::string& peek() const { return lines[at]; }
  std::string next() { return lines[at++]; }
  std::string expect(const std::string& prefix) {
    if (done() || lines[at].rfind(prefix, 0) != 0)
      throw std::runtime_error("expected '" + prefix + "' line" +
                               (done() ? " at end of input" : ", got '" + lines[at] + "'"));
    return trim(next().substr(prefix.size()));
  }
};

SymStr parse_quoted(const std::string& s, const std::vector<Sym>& gamma) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"')
    throw std::runtime_error("expected quoted output string, got '" + s + "'");
  std::string body = s.substr(1, s.size() - 2);
  if (body.empty()) return {};
  return tokenize(body, gamma);
}

Dft parse_dft_body(LineReader& r) {
  Dft t;
  t.sigma = split_ws(r.expect("sigma:"));
  t.gamma = split_ws(r.expect("gamma:"));
  t.nstates = std::stoi(r.expect("states:"));
  t.q0 = std::stoi(r.expect("start:"));
  t.delta.assign(t.nstates, std::vector<Dft::Edge>(t.sigma.size()));
  t.delta_end.assign(t.nstates, Dft::Edge{});
  std::vector<std::vector<bool>> have(t.nstates, std::vector<bool>(t.sigma.size(), false));
  std::vector<bool> have_end(t.nstates, false);
  while (!r.done() && r.peek().rfind("delta:", 0) == 0) {
    std::string body = trim(r.next().substr(6));
    size_t c1 = body.find(',');
    if (c1 == std::string::npos) throw std::runtime_error("malformed delta line");
    int q = std::stoi(trim(body.substr(0, c1)));
    std::string rest = trim(body.substr(c1 + 1));
    size_t arrow = rest.rfind("->");
    if (arrow == std::string::npos) throw std::runtime_error("malformed delta line");
    std::string symtxt = trim(rest.substr(0, arrow));
    std::string tail = trim(rest.substr(arrow + 2));
    size_t c2 = tail.rfind(',');
    if (c2 == std::string::npos) throw std::runtime_error("malformed delta line");
    SymStr out = parse_quoted(trim(tail.substr(0, c2)), t.gamma);
    int nxt = std::stoi(trim(tail.substr(c2 + 1)));
    if (q < 0 || q >= t.nstates || nxt < 0 || nxt >= t.nstates)
      throw std::runtime_error("delta line state out of range");
    if (symtxt == "END") {
      t.delta_end[q] = Dft::Edge{out, nxt};
      have_end[q] = true;
    } else {
      int a = t.sym_index(symtxt);
      if (a < 0) throw std::runtime_error("delta line symbol '" + symtxt + "' not in sigma");
      t.delta[q][a] = Dft::Edge{out, nxt};
      have[q][a] = true;
    }
  }
  for (int q = 0; q < t.nstates; q++) {
    for (size_t a = 0; a < t.sigma.size(); a++)
      if (!have[q][a])
        throw std::runtime_error("missing transition for state " + std::to_string(q) +
                                 " on '" + t.sigma[a] + "'");
    if (!have_end[q])
      throw std::runtime_error("missing END transition for state " + std::to_string(q));
  }
  t.check();
  return t;
}

void format_dft_body(std::ostringstream& os, const Dft& t) {
  os << "sigma: " << join_syms(t.sigma) << "\n";
  os << "gamma: " << join_syms(t.gamma) << "\n";
  os << "states: " << t.nstates << "\n";
  os << "start: " << t.q0 << "\n";
  for (int q = 0; q < t.nstates; q++) {
    for (size_t a = 0; a < t.sigma.size(); a++)
      os << "delta: " << q << ", " << t.sigma[a] << " -> "
         << quote_out(t.delta[q][a].out) << ", " << t.delta[q][a].next << "\n";
    os << "delta: " << q << ", END -> " << quote_out(t.delta_end[q].out) << ", "
       << t.delta_end[q].next << "\n";
  }
}

} // namespace

std::string format_dft(const Dft& t) {
  std::ostringstream os;
  os << "dft\n";
  format_dft_body(os, t);
  return os.str();
}

Dft parse_dft(const std::string& text) {
  LineReader r(text);
  r.expect("dft");
  return parse_dft_body(r);
}

std::string format_pipeline(const Pipeline& p) {
  std::ostringstream os;
  os << "pipeline\n";
  os << "stages: " << p.stages.size() << "\n";
  for (size_t k = 0; k < p.stages.size(); k++) {
    os << "stage " << k << "\n";
    os << "dir: " << (p.stages[k].dir == Dir::L2R ? "L2R" : "R2L") << "\n";
    format_dft_body(os, p.stages[k].machine);
    os << "end\n";
  }
  if (!p.final_coords.empty()) {
    os << "outcoords:";
    for (auto& c : p.final_coords) os << ' ' << c;
    os << "\n";
    os << "outcoord: " << p.out_coord << "\n";
  }
  for (auto& [from, to] : p.out_projection)
    os << "project: " << from << " -> " << quote_out(to.empty() ? SymStr{} : SymStr{to})
       << "\n";
  return os.str();
}

Pipeline parse_pipeline(const std::string& text) {
  LineReader r(text);
  r.expect("pipeline");
  int nstages = std::stoi(r.expect("stages:"));
  Pipeline p;
  for (int k = 0; k < nstages; k++) {
    r.expect("stage");
    std::string d = r.expect("dir:");
    DirectedDft s;
    s.dir = d == "R2L" ? Dir::R2L : Dir::L2R;
    s.machine = parse_dft_body(r);
    r.expect("end");
    p.stages.push_back(std::move(s));
  }
  while (!r.done()) {
    const std::string& l = r.peek();
    if (l.rfind("outcoords:", 0) == 0) {
      for (auto& c : split_ws(trim(r.next().substr(10)))) p.final_coords.push_back(c);
    } else if (l.rfind("outcoord:", 0) == 0) {
      p.out_coord = std::stoi(trim(r.next().substr(9)));
    } else if (l.rfind("project:", 0) == 0) {
      std::string body = trim(r.next().substr(8));
      size_t arrow = body.rfind("->");
      if (arrow == std::string::npos) throw std::runtime_error("malformed project line");
      Sym from = trim(body.substr(0, arrow));
      std::string totxt = trim(body.substr(arrow + 2));
      if (totxt.size() >= 2 && totxt.front() == '"' && totxt.back() == '"')
        totxt = totxt.substr(1, totxt.size() - 2);
      p.out_projection[from] = totxt;
    } else {
      throw std::runtime_error("unexpected line '" + l + "' in pipeline file");
    }
  }
  return p;
}

Dft identity_dft(const std::vector<Sym>& alphabet) {
  Dft t;
  t.sigma = alphabet;
  t.gamma = alphabet;
  t.nstates = 1;
  t.q0 = 0;
  t.delta.assign(1, {});
  for (auto& a : alphabet) t.delta[0].push_back(Dft::Edge{{a}, 0});
  t.delta_end.assign(1, Dft::Edge{{}, 0});
  return t;
}

} // namespace rasp
