#include "rasp/emit.hpp"

namespace rasp {

// Implementation pending; see aha.cpp.

TransformerSpec compile_to_transformer(const TypedProgram&, PeMode) {
  throw std::logic_error("transformer compiler not implemented yet");
}
std::string check_eq_margins(const TransformerSpec&, const ActivationSeq&,
                             const RunRecord&) {
  throw std::logic_error("transformer compiler not implemented yet");
}

} // namespace rasp
