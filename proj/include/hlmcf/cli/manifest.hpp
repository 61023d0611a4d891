#pragma once

// Run manifests: flat "key = value" text, '#' starts a comment. Times are
// flow time (dimensionless), hence the *_flow_time key suffixes.

#include <map>
#include <optional>
#include <string>

#include "hlmcf/flow.hpp"
#include "hlmcf/surface.hpp"

namespace hlmcf::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kTripleTag = "right-quaternion(-i,-j,-k)";

struct RunManifest {
  ScenarioSpec scenario;
  // start from this snapshot instead of sampling the scenario
  std::optional<std::string> initial_snapshot;
  FlowConfig flow;
  std::string triple = kTripleTag;
  std::string tool_version = kToolVersion;
  std::string platform;
  std::string output_series = "series.csv";
  std::string output_snapshot = "final.json";
  std::optional<std::string> output_plot_dir;
};

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
RunManifest manifest_from_key_values(const KeyValues& kv);
std::string manifest_to_string(const RunManifest& m);

/// Relative paths inside the manifest resolve against its directory.
RunManifest read_manifest(const std::string& path);
void write_manifest(const RunManifest& m, const std::string& path);

/// Compiler, architecture and selected SIMD path.
std::string platform_fingerprint();

}  // namespace hlmcf::cli
