#include "mobius_mono/error.hpp"

namespace mobius_mono {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::PoleEncountered: return "PoleEncountered";
    case ErrorCode::FixesInfinity: return "FixesInfinity";
    case ErrorCode::OriginIsPole: return "OriginIsPole";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::InvalidPrescribedPoint: return "InvalidPrescribedPoint";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NonFiniteIntegrand: return "NonFiniteIntegrand";
    case ErrorCode::NonRegularLevel: return "NonRegularLevel";
    case ErrorCode::OutsideHalfSpace: return "OutsideHalfSpace";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::PointNotOnSurface: return "PointNotOnSurface";
    case ErrorCode::CoverageViolated: return "CoverageViolated";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      index_(index) {}

}  // namespace mobius_mono
