#include "vanhove/errors.hpp"

namespace vanhove {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::incompatible_grids: return "incompatible-grids";
    case ErrorCode::invalid_shell: return "invalid-shell";
    case ErrorCode::domain_mismatch: return "domain-mismatch";
    case ErrorCode::degenerate_support: return "degenerate-support";
    case ErrorCode::invalid_potential: return "invalid-potential";
    case ErrorCode::incompatible_basis: return "incompatible-basis";
    case ErrorCode::not_equilibrated: return "not-equilibrated";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::size_limit: return "size-limit";
    case ErrorCode::numerical: return "numerical";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace vanhove
