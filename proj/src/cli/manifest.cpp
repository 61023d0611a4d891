#include "hlmcf/cli/manifest.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hlmcf/error.hpp"
#include "hlmcf/simd/kernels.hpp"

namespace hlmcf::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

[[noreturn]] void bad(const std::string& key, const std::string& msg) {
  throw Error(ErrorKind::BadConfig, "manifest key '" + key + "': " + msg);
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(x)) bad(key, "expected a finite number, got '" + v + "'");
  return x;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || x < 0) bad(key, "expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::size_t>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  bad(key, "expected true/false, got '" + v + "'");
}

Vec4 to_vec4(const std::string& key, const std::string& v) {
  Vec4 p;
  std::stringstream ss(v);
  std::string item;
  int c = 0;
  while (std::getline(ss, item, ',')) {
    if (c == 4) bad(key, "expected 4 comma-separated numbers");
    p[c++] = to_double(key, trim(item));
  }
  if (c != 4) bad(key, "expected 4 comma-separated numbers");
  return p;
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::BadConfig, "manifest line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::BadConfig, "manifest line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second)
      throw Error(ErrorKind::BadConfig, "manifest key '" + key + "' given twice");
  }
  return kv;
}

RunManifest manifest_from_key_values(const KeyValues& kv) {
  static const std::set<std::string> known = {
      "scenario", "eps", "R", "r", "Lu", "Lv", "expr_x1", "expr_x2", "expr_x3", "expr_x4", "periods", "nu", "nv",
      "initial_snapshot", "scheme", "dt_policy", "dt_flow_time", "cfl_safety", "steps", "renormalize_phase",
      "monitors", "lambda1_cadence", "consistency_cadence", "c_mon", "max_H_below", "t_final_flow_time", "triple",
      "tool_version", "platform", "output_series", "output_snapshot", "output_plot_dir"};
  for (const auto& [k, v] : kv)
    if (!known.count(k)) throw Error(ErrorKind::BadConfig, "unknown manifest key '" + k + "'");

  RunManifest m;
  auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto v = get("scenario")) m.scenario.name = *v;
  if (auto v = get("eps")) m.scenario.eps = to_double("eps", *v);
  if (auto v = get("R")) m.scenario.R = to_double("R", *v);
  if (auto v = get("r")) m.scenario.r = to_double("r", *v);
  if (auto v = get("Lu")) m.scenario.Lu = to_double("Lu", *v);
  if (auto v = get("Lv")) m.scenario.Lv = to_double("Lv", *v);
  for (int c = 0; c < 4; ++c) {
    const std::string key = "expr_x" + std::to_string(c + 1);
    if (auto v = get(key.c_str())) m.scenario.expr[c] = *v;
  }
  if (auto v = get("periods")) m.scenario.periods = to_vec4("periods", *v);
  if (auto v = get("nu")) m.scenario.nu = to_count("nu", *v);
  if (auto v = get("nv")) m.scenario.nv = to_count("nv", *v);
  if (auto v = get("initial_snapshot")) m.initial_snapshot = *v;

  FlowConfig& f = m.flow;
  if (auto v = get("scheme")) {
    if (*v == "euler") f.scheme = Scheme::Euler;
    else if (*v == "rk2") f.scheme = Scheme::Rk2;
    else bad("scheme", "expected euler or rk2");
  }
  if (auto v = get("dt_policy")) {
    if (*v == "cfl") f.dt.kind = DtPolicy::Kind::Cfl;
    else if (*v == "fixed") f.dt.kind = DtPolicy::Kind::Fixed;
    else bad("dt_policy", "expected cfl or fixed");
  }
  if (auto v = get("dt_flow_time")) f.dt.dt = to_double("dt_flow_time", *v);
  if (auto v = get("cfl_safety")) f.dt.safety = to_double("cfl_safety", *v);
  if (auto v = get("steps")) f.steps = to_count("steps", *v);
  if (auto v = get("renormalize_phase")) f.renormalize_phase = to_bool("renormalize_phase", *v);
  if (auto v = get("monitors")) {
    f.monitor_lambda1 = f.monitor_consistency = f.monitor_metric = false;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item == "lambda1") f.monitor_lambda1 = true;
      else if (item == "consistency") f.monitor_consistency = true;
      else if (item == "metric") f.monitor_metric = true;
      else if (!item.empty() && item != "none") bad("monitors", "unknown monitor '" + item + "'");
    }
  }
  if (auto v = get("lambda1_cadence")) f.lambda1_cadence = to_count("lambda1_cadence", *v);
  if (auto v = get("consistency_cadence")) f.consistency_cadence = to_count("consistency_cadence", *v);
  if (auto v = get("c_mon")) f.c_mon = to_double("c_mon", *v);
  if (auto v = get("max_H_below")) f.max_H_below = to_double("max_H_below", *v);
  if (auto v = get("t_final_flow_time")) f.t_final = to_double("t_final_flow_time", *v);
  f.validate();

  if (auto v = get("triple")) {
    if (*v != kTripleTag) bad("triple", "only '" + std::string(kTripleTag) + "' is implemented");
    m.triple = *v;
  }
  if (auto v = get("tool_version")) m.tool_version = *v;
  if (auto v = get("platform")) m.platform = *v;
  if (auto v = get("output_series")) m.output_series = *v;
  if (auto v = get("output_snapshot")) m.output_snapshot = *v;
  if (auto v = get("output_plot_dir")) m.output_plot_dir = *v;
  return m;
}

std::string manifest_to_string(const RunManifest& m) {
  std::ostringstream o;
  const ScenarioSpec& s = m.scenario;
  o << "# hlmcf run manifest\n";
  o << "scenario = " << s.name << "\n";
  o << "nu = " << s.nu << "\nnv = " << s.nv << "\n";
  if (s.name == "flat-plane-torus") o << "Lu = " << fmt(s.Lu) << "\nLv = " << fmt(s.Lv) << "\n";
  if (s.name == "clifford" || s.name == "clifford-j3") o << "R = " << fmt(s.R) << "\nr = " << fmt(s.r) << "\n";
  if (s.name == "perturbed-complex-torus" || s.name == "lagrangian-graph") o << "eps = " << fmt(s.eps) << "\n";
  if (s.name == "custom-expression")
    for (int c = 0; c < 4; ++c) o << "expr_x" << c + 1 << " = " << s.expr[c] << "\n";
  if (s.periods) {
    o << "periods = ";
    for (int c = 0; c < 4; ++c) o << (c ? "," : "") << fmt((*s.periods)[c]);
    o << "\n";
  }
  if (m.initial_snapshot) o << "initial_snapshot = " << *m.initial_snapshot << "\n";

  const FlowConfig& f = m.flow;
  o << "\n# flow\n";
  o << "scheme = " << (f.scheme == Scheme::Euler ? "euler" : "rk2") << "\n";
  o << "dt_policy = " << (f.dt.kind == DtPolicy::Kind::Cfl ? "cfl" : "fixed") << "\n";
  o << "dt_flow_time = " << fmt(f.dt.dt) << "\n";
  o << "cfl_safety = " << fmt(f.dt.safety) << "\n";
  o << "steps = " << f.steps << "\n";
  o << "renormalize_phase = " << (f.renormalize_phase ? "true" : "false") << "\n";
  std::string mons;
  if (f.monitor_lambda1) mons += "lambda1,";
  if (f.monitor_consistency) mons += "consistency,";
  if (f.monitor_metric) mons += "metric,";
  if (mons.empty()) mons = "none";
  else mons.pop_back();
  o << "monitors = " << mons << "\n";
  o << "lambda1_cadence = " << f.lambda1_cadence << "\n";
  o << "consistency_cadence = " << f.consistency_cadence << "\n";
  o << "c_mon = " << fmt(f.c_mon) << "\n";
  if (f.max_H_below) o << "max_H_below = " << fmt(*f.max_H_below) << "\n";
  if (f.t_final) o << "t_final_flow_time = " << fmt(*f.t_final) << "\n";

  o << "\n# provenance\n";
  o << "triple = " << m.triple << "\n";
  o << "tool_version = " << m.tool_version << "\n";
  o << "platform = " << (m.platform.empty() ? platform_fingerprint() : m.platform) << "\n";
  o << "\n# outputs\n";
  o << "output_series = " << m.output_series << "\n";
  o << "output_snapshot = " << m.output_snapshot << "\n";
  if (m.output_plot_dir) o << "output_plot_dir = " << *m.output_plot_dir << "\n";
  return o.str();
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open manifest '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  RunManifest m = manifest_from_key_values(parse_key_values(ss.str()));
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  if (m.initial_snapshot) resolve(*m.initial_snapshot);
  resolve(m.output_series);
  resolve(m.output_snapshot);
  if (m.output_plot_dir) resolve(*m.output_plot_dir);
  return m;
}

void write_manifest(const RunManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write manifest '" + path + "'");
  out << manifest_to_string(m);
  if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

std::string platform_fingerprint() {
  std::string s;
#if defined(__x86_64__)
  s += "x86_64";
#elif defined(__aarch64__)
  s += "aarch64";
#else
  s += "unknown-arch";
#endif
#if defined(__linux__)
  s += "-linux";
#endif
#if defined(__clang__)
  s += "-clang" + std::to_string(__clang_major__);
#elif defined(__GNUC__)
  s += "-gcc" + std::to_string(__GNUC__);
#endif
  s += "-" + std::string(simd::isa_name(simd::active_isa()));
  return s;
}

}  // namespace hlmcf::cli
