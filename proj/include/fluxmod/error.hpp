#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fluxmod {

enum class ErrorKind {
  ZeroFrequencyOnGrid,
  NonPositiveBase,
  InvalidArgument,
  SingularSystem,
  FluxBeyondHalfQuantum,
  FluxMarginViolated,
  UnsupportedPumpCount,
  IncommensuratePump,
  NonPositiveResistance,
  NonPositiveJ,
  GridMismatch,
  DanglingNode,
  NegativeAbsorbedCapacitance,
  UnsupportedElement,
  NoSteadyState,
  IllConditionedProjection,
  NoImprovement,
  UnknownDirective,
  DuplicateName,
  UnresolvedNodeRef,
  MalformedNumber,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroFrequencyOnGrid: return "ZeroFrequencyOnGrid";
    case ErrorKind::NonPositiveBase: return "NonPositiveBase";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::FluxBeyondHalfQuantum: return "FluxBeyondHalfQuantum";
    case ErrorKind::FluxMarginViolated: return "FluxMarginViolated";
    case ErrorKind::UnsupportedPumpCount: return "UnsupportedPumpCount";
    case ErrorKind::IncommensuratePump: return "IncommensuratePump";
    case ErrorKind::NonPositiveResistance: return "NonPositiveResistance";
    case ErrorKind::NonPositiveJ: return "NonPositiveJ";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::DanglingNode: return "DanglingNode";
    case ErrorKind::NegativeAbsorbedCapacitance: return "NegativeAbsorbedCapacitance";
    case ErrorKind::UnsupportedElement: return "UnsupportedElement";
    case ErrorKind::NoSteadyState: return "NoSteadyState";
    case ErrorKind::IllConditionedProjection: return "IllConditionedProjection";
    case ErrorKind::NoImprovement: return "NoImprovement";
    case ErrorKind::UnknownDirective: return "UnknownDirective";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::UnresolvedNodeRef: return "UnresolvedNodeRef";
    case ErrorKind::MalformedNumber: return "MalformedNumber";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable kind next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Solver-side failures map to CLI exit code 2, validation to 1.
  bool is_solver_failure() const noexcept {
    return kind_ == ErrorKind::SingularSystem || kind_ == ErrorKind::NoSteadyState ||
           kind_ == ErrorKind::IllConditionedProjection || kind_ == ErrorKind::NoImprovement;
  }

 private:
  ErrorKind kind_;
};

}  // namespace fluxmod
