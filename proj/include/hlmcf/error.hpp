#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hlmcf {

enum class ErrorKind {
  // validation
  InvalidArgument,
  UnknownScenario,
  DegenerateParameters,
  ShapeMismatch,
  NotUnit,
  NotOrthogonal,
  FrameNotOrthonormal,
  OrientationNegative,
  NotLagrangian,
  PoleProximity,
  RadiusTooLarge,
  LipschitzViolated,
  EpsilonTooLarge,
  InsufficientRecords,
  InsufficientSamples,
  NonpositiveEnergy,
  CorruptSnapshot,
  BadConfig,
  // numerical
  VerificationFailed,
  MetricDegenerate,
  NormalSeedCollapse,
  StabilityViolation,
  NoConvergence,
  NonFinite,
  // io
  Io,
};

enum class ErrorClass { Validation, Numerical, Io };

std::string_view to_string(ErrorKind kind);
ErrorClass classify(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hlmcf
