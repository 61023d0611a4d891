#include "hlmcf/snapshot.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hlmcf/error.hpp"

namespace hlmcf {

using nlohmann::json;

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

[[noreturn]] void corrupt(const std::string& msg) { throw Error(ErrorKind::CorruptSnapshot, msg); }

double read_number(const json& j, const char* what) {
  if (!j.is_number()) corrupt(std::string(what) + " is not a finite number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) corrupt(std::string(what) + " is not finite");
  return x;
}

}  // namespace

std::string snapshot_to_string(const SurfaceGrid& s) {
  json doc;
  doc["version"] = kSnapshotVersion;
  doc["nu"] = s.nu;
  doc["nv"] = s.nv;
  if (s.ambient.periods) {
    json p = json::array();
    for (int c = 0; c < 4; ++c) p.push_back(number((*s.ambient.periods)[c]));
    doc["periods"] = p;
  } else {
    doc["periods"] = nullptr;
  }
  json pos = json::array();
  for (const Vec4& x : s.positions)
    for (int c = 0; c < 4; ++c) pos.push_back(number(x[c]));
  doc["positions"] = pos;
  return doc.dump() + "\n";
}

SurfaceGrid snapshot_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    corrupt(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) corrupt("top level is not an object");
  for (const char* key : {"version", "nu", "nv", "periods", "positions"})
    if (!doc.contains(key)) corrupt(std::string("missing field '") + key + "'");
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kSnapshotVersion)
    corrupt("unsupported snapshot version");
  if (!doc["nu"].is_number_unsigned() || !doc["nv"].is_number_unsigned()) corrupt("nu/nv must be positive integers");

  SurfaceGrid s;
  s.nu = doc["nu"].get<std::size_t>();
  s.nv = doc["nv"].get<std::size_t>();
  if (s.nu < 4 || s.nv < 4) corrupt("nu and nv must be at least 4");

  const json& periods = doc["periods"];
  if (!periods.is_null()) {
    if (!periods.is_array() || periods.size() != 4) corrupt("periods must be null or a 4-array");
    Vec4 p;
    for (int c = 0; c < 4; ++c) {
      p[c] = read_number(periods[c], "period");
      if (!(p[c] > 0.0)) corrupt("periods must be positive");
    }
    s.ambient.periods = p;
  }

  const json& pos = doc["positions"];
  if (!pos.is_array() || pos.size() != 4 * s.size()) corrupt("positions must hold 4 * nu * nv numbers");
  s.positions.resize(s.size());
  for (std::size_t n = 0; n < s.size(); ++n)
    for (int c = 0; c < 4; ++c) s.positions[n][c] = read_number(pos[4 * n + c], "position");
  return s;
}

void write_snapshot(const SurfaceGrid& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << snapshot_to_string(s);
  if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

SurfaceGrid read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return snapshot_from_string(ss.str());
}

}  // namespace hlmcf
