#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kgscat {

enum class Errc {
  MaxDerivOrderExceeded,
  LogPowerExceeded,
  RhoOutOfRange,
  DegreeZeroCoefficient,
  ResonantInput,
  OrderZero,
  NotNonresonant,
  NonTermination,
  ClassificationFailure,
  StepFailure,
  ContractionFailure,
  OutsideLightCone,
  CflViolation,
  BoundaryLeak,
  ConfigInvalid,
  DegenerateFit,
  IoError,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI report) can name the failing check.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MaxDerivOrderExceeded: return "MaxDerivOrderExceeded";
    case Errc::LogPowerExceeded: return "LogPowerExceeded";
    case Errc::RhoOutOfRange: return "RhoOutOfRange";
    case Errc::DegreeZeroCoefficient: return "DegreeZeroCoefficient";
    case Errc::ResonantInput: return "ResonantInput";
    case Errc::OrderZero: return "OrderZero";
    case Errc::NotNonresonant: return "NotNonresonant";
    case Errc::NonTermination: return "NonTermination";
    case Errc::ClassificationFailure: return "ClassificationFailure";
    case Errc::StepFailure: return "StepFailure";
    case Errc::ContractionFailure: return "ContractionFailure";
    case Errc::OutsideLightCone: return "OutsideLightCone";
    case Errc::CflViolation: return "CflViolation";
    case Errc::BoundaryLeak: return "BoundaryLeak";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::DegenerateFit: return "DegenerateFit";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace kgscat
