#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace taylorcert {

enum class ErrorKind {
  NumericalDomain,
  Order,
  ConstantsInfeasible,
  InfeasibleBudget,
  StepCollapse,
  BlowUp,
  DomainMismatch,
  OracleUnreliable,
  CapTooSmall,
  InvalidArgument,
  Config,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Process exit code used by the command-line front end for each error kind.
/// 2 = infeasible budget or constraint, 3 = numerical failure, 4 = configuration error.
[[nodiscard]] int exit_code(ErrorKind kind) noexcept;

/// Single exception type for every failure raised by the library. The kind
/// names the violated constraint so callers can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace taylorcert
