#include "hlmcf/error.hpp"

namespace hlmcf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::UnknownScenario: return "unknown-scenario";
    case ErrorKind::DegenerateParameters: return "degenerate-parameters";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::NotUnit: return "not-unit";
    case ErrorKind::NotOrthogonal: return "not-orthogonal";
    case ErrorKind::FrameNotOrthonormal: return "frame-not-orthonormal";
    case ErrorKind::OrientationNegative: return "orientation-negative";
    case ErrorKind::NotLagrangian: return "not-lagrangian";
    case ErrorKind::PoleProximity: return "pole-proximity";
    case ErrorKind::RadiusTooLarge: return "radius-too-large";
    case ErrorKind::LipschitzViolated: return "lipschitz-violated";
    case ErrorKind::EpsilonTooLarge: return "epsilon-too-large";
    case ErrorKind::InsufficientRecords: return "insufficient-records";
    case ErrorKind::InsufficientSamples: return "insufficient-samples";
    case ErrorKind::NonpositiveEnergy: return "nonpositive-energy";
    case ErrorKind::CorruptSnapshot: return "corrupt-snapshot";
    case ErrorKind::BadConfig: return "bad-config";
    case ErrorKind::VerificationFailed: return "verification-failed";
    case ErrorKind::MetricDegenerate: return "metric-degenerate";
    case ErrorKind::NormalSeedCollapse: return "normal-seed-collapse";
    case ErrorKind::StabilityViolation: return "stability-violation";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

ErrorClass classify(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::VerificationFailed:
    case ErrorKind::MetricDegenerate:
    case ErrorKind::NormalSeedCollapse:
    case ErrorKind::StabilityViolation:
    case ErrorKind::NoConvergence:
    case ErrorKind::NonFinite:
      return ErrorClass::Numerical;
    case ErrorKind::Io:
      return ErrorClass::Io;
    default:
      return ErrorClass::Validation;
  }
}

}  // namespace hlmcf
