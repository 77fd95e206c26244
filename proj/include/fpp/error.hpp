#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fpp {

enum class ErrorKind {
  domain,
  non_convergence,
  singular_system,
  bracket_failure,
  precondition,
  degenerate_weights,
  degenerate_sample,
  validation,
  io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Validation-class errors map to CLI exit code 1, numerical ones to 2.
bool is_numerical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace fpp
