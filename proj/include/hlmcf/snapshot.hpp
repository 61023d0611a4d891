#pragma once

#include <iosfwd>
#include <string>

#include "hlmcf/surface.hpp"

namespace hlmcf {

inline constexpr int kSnapshotVersion = 1;

/// {version, nu, nv, periods (null on R^4), positions (row-major, 4 per node)}.
/// Doubles use shortest round-trip formatting, so write/read is bit-exact.
std::string snapshot_to_string(const SurfaceGrid& s);
SurfaceGrid snapshot_from_string(const std::string& text);

void write_snapshot(const SurfaceGrid& s, const std::string& path);
SurfaceGrid read_snapshot(const std::string& path);

}  // namespace hlmcf
