#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hlmcf/surface.hpp"

namespace hlmcf::cli {

enum ExitCode { kOk = 0, kValidation = 2, kNumerical = 3, kIo = 4 };

struct CheckResult {
  std::string check;
  std::optional<double> value;  // empty when not applicable
  double tolerance = 0.0;
  bool pass = true;
  std::string note;
};

/// Identity residual tolerance at the grid's spacing: 5e-3 at 64 nodes per
/// period, scaled with h^2.
double identity_tolerance(const GeometryCache& geom);

/// Invariant suites of every module on one state.
std::vector<CheckResult> run_checks(const SurfaceGrid& grid);

std::string checks_to_json(const std::vector<CheckResult>& checks);

/// Full command line (argv without the program name); returns the exit code.
int run_cli(const std::vector<std::string>& args);

}  // namespace hlmcf::cli
