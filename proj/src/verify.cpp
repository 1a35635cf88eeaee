// Cross-backend equivalence driver: enumerate inputs shortest-first and
// compare the interpreter against the reference transduction, the lowered
// transducer pipeline, and the compiled transformer.

#include "rasp/oracle.hpp"

#include "rasp/emit.hpp"
#include "rasp/lower.hpp"

#include <sstream>

namespace rasp {

namespace {

std::string join(const SymStr& w) {
  std::string r;
  for (auto& x : w) r += x;
  return r.empty() ? "(empty)" : r;
}

void fail_at(VerifyResult& res, const SymStr& w, const std::string& detail) {
  if (!res.pass) return; // keep the first (lexicographically least) failure
  res.pass = false;
  res.counterexample = join(w);
  res.detail = detail;
}

// n values to exercise for one input length
std::vector<int> n_choices(const TypedProgram& p, int len, const VerifyOptions& opt) {
  if (p.convention != Convention::Padded) return {len};
  std::vector<int> ns;
  long q = minlen_q(p, len);
  for (int off : opt.n_offsets) ns.push_back(static_cast<int>(q) + off);
  return ns;
}

void verify_oracle(const TypedProgram& p, const VerifyOptions& opt, VerifyResult& res) {
  const Oracle& o = find_oracle(p.name);
  if (o.sigma != p.sigma)
    throw std::runtime_error("oracle alphabet differs from program alphabet for '" +
                             p.name + "'");
  long count = 0;
  for (auto& w : enumerate_words(p.sigma, opt.maxlen)) {
    SymStr expect = o.fn(w);
    for (int n : n_choices(p, static_cast<int>(w.size()), opt)) {
      SymStr got = run(p, w, n);
      count++;
      res.checked++;
      if (got != expect) {
        fail_at(res, w,
                "oracle: n=" + std::to_string(n) + " expected \"" + join(expect) +
                    "\" got \"" + join(got) + "\"");
        return;
      }
    }
  }
  res.log.push_back("oracle: " + std::to_string(count) + " runs agree");
}

void verify_fst(const TypedProgram& p, const VerifyOptions& opt, VerifyResult& res) {
  if (p.dialect != Dialect::BRASP)
    throw std::runtime_error(
        "transducer backend only applies to programs without positions");
  Pipeline pl = brasp_to_pipeline(normalize_scores(p));
  long count = 0;
  for (auto& w : enumerate_words(p.sigma, opt.maxlen)) {
    if (w.empty()) continue; // stages need at least one position
    Trace t = eval(p, {w, static_cast<int>(w.size())});
    const std::vector<Value>& outrow = *t.row("out");
    SymStr expect;
    for (auto& v : outrow) expect.push_back(show_value(v));
    SymStr got = run_pipeline_projected(pl, w);
    count++;
    res.checked++;
    if (got != expect) {
      fail_at(res, w, "pipeline: expected cells \"" + join(expect) + "\" got \"" +
                          join(got) + "\"");
      return;
    }
  }
  res.log.push_back("pipeline: " + std::to_string(count) + " runs agree");
}

void verify_aha(const TypedProgram& p, const VerifyOptions& opt, VerifyResult& res) {
  if (p.convention != Convention::Padded)
    throw std::runtime_error("transformer backend only applies to padded programs");
  std::vector<PeMode> modes{PeMode::B};
  if (opt.both_pe_modes) modes.push_back(PeMode::C);
  for (PeMode mode : modes) {
    TransformerSpec spec = compile_to_transformer(p, mode);
    const char* mname = mode == PeMode::B ? "B" : "C";
    long count = 0;
    for (auto& w : enumerate_words(p.sigma, opt.maxlen)) {
      for (int n : n_choices(p, static_cast<int>(w.size()), opt)) {
        Trace t = eval(p, {w, n});
        const std::vector<Value>& outrow = *t.row("out");
        SymStr expect;
        for (auto& v : outrow) expect.push_back(show_value(v));
        RunRecord rec;
        ActivationSeq u0 = encode_input(spec, w, n);
        ActivationSeq un = rasp::run(spec, u0, &rec);
        SymStr got = decode_output(spec, un);
        count++;
        res.checked++;
        if (got != expect) {
          fail_at(res, w,
                  std::string("transformer mode ") + mname + ": n=" + std::to_string(n) +
                      " expected \"" + join(expect) + "\" got \"" + join(got) + "\"");
          return;
        }
        if (opt.check_margins) {
          std::string m = check_eq_margins(spec, u0, rec);
          if (!m.empty()) {
            fail_at(res, w,
                    std::string("transformer mode ") + mname + ": n=" +
                        std::to_string(n) + " margin violation: " + m);
            return;
          }
        }
      }
    }
    res.log.push_back(std::string("transformer mode ") + mname + ": " +
                      std::to_string(count) + " runs agree");
  }
}

} // namespace

VerifyResult verify_program(const TypedProgram& p, const VerifyOptions& opt) {
  VerifyResult res;
  switch (opt.against) {
    case Backend::Oracle: verify_oracle(p, opt, res); break;
    case Backend::Fst: verify_fst(p, opt, res); break;
    case Backend::Aha: verify_aha(p, opt, res); break;
    case Backend::All:
      if (has_oracle(p.name)) verify_oracle(p, opt, res);
      if (res.pass && p.dialect == Dialect::BRASP) verify_fst(p, opt, res);
      if (res.pass && p.convention == Convention::Padded) verify_aha(p, opt, res);
      break;
  }
  return res;
}

} // namespace rasp
