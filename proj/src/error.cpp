#include "fpp/error.hpp"

namespace fpp {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::non_convergence: return "non_convergence";
    case ErrorKind::singular_system: return "singular_system";
    case ErrorKind::bracket_failure: return "bracket_failure";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::degenerate_weights: return "degenerate_weights";
    case ErrorKind::degenerate_sample: return "degenerate_sample";
    case ErrorKind::validation: return "validation";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

bool is_numerical(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::non_convergence:
    case ErrorKind::singular_system:
    case ErrorKind::bracket_failure:
    case ErrorKind::degenerate_weights:
    case ErrorKind::degenerate_sample:
      return true;
    default:
      return false;
  }
}

}  // namespace fpp
