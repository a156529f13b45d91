#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relay {

enum class ErrorKind {
  InvalidArgument,
  InvalidState,
  NoConvergence,
  CornerCollision,
  Nonoscillatory,
  NoCrossing,
  NoRoot,
  Degenerate,
  LostBranch,
};

std::string_view to_string(ErrorKind kind);

/// Numerical or precondition failure raised by the solver modules.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace relay
