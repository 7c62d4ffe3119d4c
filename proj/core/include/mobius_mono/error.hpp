#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mobius_mono {

enum class ErrorCode {
  RankDeficient,
  Degenerate,
  PoleEncountered,
  FixesInfinity,
  OriginIsPole,
  ValidationFailed,
  InvalidPrescribedPoint,
  InvalidParameter,
  StepTooLarge,
  NonFiniteIntegrand,
  NonRegularLevel,
  OutsideHalfSpace,
  OutsideDomain,
  PointNotOnSurface,
  CoverageViolated,
};

std::string_view to_string(ErrorCode code);

/// Mathematical precondition or numerical failure raised by the core library.
/// `index()` carries the offending word position for PoleEncountered.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace mobius_mono
