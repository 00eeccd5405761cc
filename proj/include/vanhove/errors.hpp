#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vanhove {

enum class ErrorCode {
  invalid_argument,
  incompatible_grids,
  invalid_shell,
  domain_mismatch,
  degenerate_support,
  invalid_potential,
  incompatible_basis,
  not_equilibrated,
  config_error,
  size_limit,
  numerical,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every library failure carries a machine-checkable code; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace vanhove
