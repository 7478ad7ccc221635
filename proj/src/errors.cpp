#include "taylorcert/errors.hpp"

namespace taylorcert {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NumericalDomain: return "NumericalDomainError";
    case ErrorKind::Order: return "OrderError";
    case ErrorKind::ConstantsInfeasible: return "ConstantsInfeasible";
    case ErrorKind::InfeasibleBudget: return "InfeasibleBudget";
    case ErrorKind::StepCollapse: return "StepCollapse";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::DomainMismatch: return "DomainMismatch";
    case ErrorKind::OracleUnreliable: return "OracleUnreliable";
    case ErrorKind::CapTooSmall: return "CapTooSmall";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "ConfigError";
  }
  return "UnknownError";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ConstantsInfeasible:
    case ErrorKind::InfeasibleBudget:
    case ErrorKind::StepCollapse:
    case ErrorKind::CapTooSmall:
      return 2;
    case ErrorKind::NumericalDomain:
    case ErrorKind::BlowUp:
    case ErrorKind::DomainMismatch:
    case ErrorKind::OracleUnreliable:
      return 3;
    case ErrorKind::Order:
    case ErrorKind::InvalidArgument:
    case ErrorKind::Config:
      return 4;
  }
  return 4;
}

}  // namespace taylorcert
