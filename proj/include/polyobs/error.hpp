#ifndef POLYOBS_ERROR_HPP
#define POLYOBS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace polyobs {

enum class ErrorCode {
  NotSquare,
  NoConvergence,
  JordanDefective,
  RankDeficient,
  IterationCap,
  EmptyPolytope,
  UnboundedDirection,
  NotStable,
  CMaxExceeded,
  BadSize,
  ResidualTooLarge,
  UnstableGain,
  DomainMismatch,
  OrderViolation,
  StepTooLarge,
  Parse,
  Validation,
  EnclosureViolation,
  IssViolation,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSquare: return "ENotSquare";
    case ErrorCode::NoConvergence: return "ENoConvergence";
    case ErrorCode::JordanDefective: return "EJordanDefective";
    case ErrorCode::RankDeficient: return "ERankDeficient";
    case ErrorCode::IterationCap: return "EIterationCap";
    case ErrorCode::EmptyPolytope: return "EEmptyPolytope";
    case ErrorCode::UnboundedDirection: return "EUnboundedDirection";
    case ErrorCode::NotStable: return "ENotStable";
    case ErrorCode::CMaxExceeded: return "ECMaxExceeded";
    case ErrorCode::BadSize: return "EBadSize";
    case ErrorCode::ResidualTooLarge: return "EResidualTooLarge";
    case ErrorCode::UnstableGain: return "EUnstableGain";
    case ErrorCode::DomainMismatch: return "EDomainMismatch";
    case ErrorCode::OrderViolation: return "EOrderViolation";
    case ErrorCode::StepTooLarge: return "EStepTooLarge";
    case ErrorCode::Parse: return "EParse";
    case ErrorCode::Validation: return "EValidation";
    case ErrorCode::EnclosureViolation: return "EEnclosureViolation";
    case ErrorCode::IssViolation: return "EIssViolation";
    case ErrorCode::Io: return "EIo";
  }
  return "EUnknown";
}

/// Process exit status for a failure: 2 bad input, 3 violated property,
/// 4 numerical failure.
inline int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse:
    case ErrorCode::Validation:
    case ErrorCode::Io:
    case ErrorCode::BadSize:
    case ErrorCode::NotSquare:
    case ErrorCode::DomainMismatch:
    case ErrorCode::UnstableGain:
    case ErrorCode::NotStable:
      return 2;
    case ErrorCode::EnclosureViolation:
    case ErrorCode::IssViolation:
    case ErrorCode::OrderViolation:
      return 3;
    default:
      return 4;
  }
}

}  // namespace polyobs

#endif  // POLYOBS_ERROR_HPP
