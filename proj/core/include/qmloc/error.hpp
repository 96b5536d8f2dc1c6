#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qmloc {

enum class ErrorCode {
  InvalidInput,
  NonConforming,
  DegenerateElement,
  UnknownLocus,
  UnsupportedDegree,
  PointOutsideElement,
  SingularMassMatrix,
  SingularPointOnQuadratureNode,
  PlanMismatch,
  QuadratureFailure,
  NonPositiveValue,
  LocusMismatch,
  NoMonotonePath,
  SolverFailure,
  ParameterOutOfRange,
  RefusesNonQM,
  IoFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; every failure in the library
/// surfaces as one of these.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

#define QMLOC_THROW_IF(cond, code, msg)            \
  do {                                             \
    if (cond) throw ::qmloc::Error((code), (msg)); \
  } while (0)

}  // namespace qmloc
