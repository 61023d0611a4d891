#include "hlmcf/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>
#include <json.hpp>

#include "hlmcf/cli/manifest.hpp"
#include "hlmcf/cli/series_io.hpp"
#include "hlmcf/cli/svg_plot.hpp"
#include "hlmcf/error.hpp"
#include "hlmcf/flow.hpp"
#include "hlmcf/hk_kernel.hpp"
#include "hlmcf/phase.hpp"
#include "hlmcf/snapshot.hpp"
#include "hlmcf/spectral.hpp"

namespace hlmcf::cli {

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// raw / scale, or raw itself when the scale vanishes (flat data)
double relative(double raw, double scale) { return scale > 0.0 ? raw / scale : raw; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

int exit_code_for(const Error& e) {
  switch (classify(e.kind())) {
    case ErrorClass::Validation: return kValidation;
    case ErrorClass::Numerical: return kNumerical;
    case ErrorClass::Io: return kIo;
  }
  return kNumerical;
}

}  // namespace

double identity_tolerance(const GeometryCache& geom) {
  const double h = std::max(geom.hu, geom.hv) / (2.0 * std::numbers::pi / 64.0);
  return 5e-3 * h * h;
}

std::vector<CheckResult> run_checks(const SurfaceGrid& grid) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double value, double tol, std::string note = {}) {
    out.push_back({std::move(name), value, tol, value <= tol, std::move(note)});
  };
  auto skip = [&](std::string name, double tol, std::string note) {
    out.push_back({std::move(name), std::nullopt, tol, true, std::move(note)});
  };

  const hk::TwistorTriple t = hk::standard_twistor_triple();
  {
    const Mat4 I = Mat4::Identity();
    double q = 0.0;
    for (int d = 1; d <= 3; ++d) {
      q = std::max(q, (t[d] * t[d] + I).cwiseAbs().maxCoeff());
      q = std::max(q, (t[d].transpose() * t[d] - I).cwiseAbs().maxCoeff());
    }
    q = std::max(q, (t.j1 * t.j2 - t.j3).cwiseAbs().maxCoeff());
    q = std::max(q, (t.j2 * t.j3 - t.j1).cwiseAbs().maxCoeff());
    q = std::max(q, (t.j3 * t.j1 - t.j2).cwiseAbs().maxCoeff());
    add("quaternion-relations", q, hk::kSelfCheckTolerance);
  }

  const GeometryCache geom = compute_geometry(grid);
  {
    double frame = 0.0, hcons = 0.0, orient = std::numeric_limits<double>::infinity();
    for (const NodeGeometry& ng : geom.nodes) {
      Mat4 E;
      E << ng.e1, ng.e2, ng.e3, ng.e4;
      frame = std::max(frame, (E.transpose() * E - Mat4::Identity()).cwiseAbs().maxCoeff());
      orient = std::min(orient, E.determinant());
      const Vec4* normals[2] = {&ng.e3, &ng.e4};
      Vec4 H = Vec4::Zero();
      for (int a = 0; a < 2; ++a)
        H += (ng.ginv(0, 0) * ng.h[a][0][0] + 2.0 * ng.ginv(0, 1) * ng.h[a][0][1] + ng.ginv(1, 1) * ng.h[a][1][1]) *
             *normals[a];
      hcons = std::max(hcons, (H - ng.H).norm() / std::max(1.0, ng.H.norm()));
    }
    add("frame-orthonormality", frame, 1e-10);
    add("frame-orientation", orient > 0.0 ? 0.0 : 1.0, 0.0, "0 when every frame has det > 0");
    add("mean-curvature-trace", hcons, 1e-12);
  }

  const double tol = identity_tolerance(geom);
  const PhaseField pf = phase_field(geom, t);
  double max_a2 = 0.0, max_grad = 0.0;
  for (std::size_t n = 0; n < geom.size(); ++n) {
    max_a2 = std::max(max_a2, geom.nodes[n].norm_A_sq);
    max_grad = std::max(max_grad, pf.energy_density[n]);
  }
  {
    double unit = 0.0;
    for (const Vec3& a : pf.a) unit = std::max(unit, std::abs(a.norm() - 1.0));
    add("phase-unit-norm", unit, 1e-10);
  }
  {
    const PlfResult plf = plf_residual(geom, pf, t);
    add("plf-residual", relative(max_abs(plf.residual), max_abs(plf.magnitude)), tol,
        "max |i_H Omega + 2i del Theta| / max of either side");
  }
  {
    const BjaResult bja = bja_identity(geom, pf, t);
    double gap = 0.0;
    for (std::size_t n = 0; n < geom.size(); ++n) gap = std::max(gap, std::abs(bja.lhs[n] - bja.rhs[n]));
    add("bja-gap", relative(gap, max_abs(bja.lhs)), tol, "max |lhs - rhs| / max lhs");
    add("bja-ratio", bja.max_ratio, 2.9, "max |grad a| / |A|");
  }
  {
    int best_axis = 3;
    double best = -1.0;
    for (int axis = 1; axis <= 3; ++axis) {
      const int r = hk::reference_axes(axis)[2];
      double closest = 1.0;
      for (const Vec3& a : pf.a) closest = std::min(closest, 1.0 - std::abs(a[r]));
      if (closest > best) best = closest, best_axis = axis;
    }
    if (best > kPoleMargin)
      add("etd-residual", relative(max_abs(polar_identity_check(pf, geom, best_axis)), max_grad), tol,
          "polar chart about J" + std::to_string(best_axis) + ", relative to max |grad a|^2");
    else
      skip("etd-residual", tol, "phase reaches every pole");
  }
  add("gauss-residual", relative(max_abs(gauss_curvature_check(geom)), max_a2), tol, "relative to max |A|^2");
  add("hyper-lagrangian-residual", max_abs(hyper_lagrangian_residual(geom, pf, t)), 1e-8);
  {
    const std::vector<double> margin = hdp_margin(geom, pf);
    const double worst = *std::min_element(margin.begin(), margin.end());
    add("hdp-margin", std::max(0.0, -worst), hdp_slack(geom, pf), "deficit of 2|grad a|^2 - |H|^2 against slack");
  }
  {
    bool done = false;
    for (int axis = 1; axis <= 3 && !done; ++axis) {
      const int r = hk::reference_axes(axis)[2];
      double worst = 0.0;
      for (const Vec3& a : pf.a) worst = std::max(worst, std::abs(a[r]));
      if (!(worst < kLagrangianTolerance)) continue;
      const LagrangianAngle la = lagrangian_angle(pf, geom, axis);
      std::vector<double> h2(geom.size());
      for (std::size_t n = 0; n < geom.size(); ++n) h2[n] = geom.nodes[n].norm_H_sq;
      add("exactness-residual", relative(la.exactness_residual, std::sqrt(surface_integral(h2, geom))), tol,
          "Lagrangian for J" + std::to_string(axis) + ", relative to ||H||; winding (" + std::to_string(la.winding_u) +
              ", " + std::to_string(la.winding_v) + ")");
      done = true;
    }
    if (!done) skip("exactness-residual", tol, "not Lagrangian for any J_d");
  }
  {
    const SpectralResult sr = lambda1(geom);
    add("lambda1-positive", sr.lambda1 > 1e-8 ? 0.0 : 1.0, 0.0, "lambda1 = " + format_number(sr.lambda1));
    add("eigen-residual", sr.residual, 1e-7);
  }
  return out;
}

std::string checks_to_json(const std::vector<CheckResult>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckResult& c : checks) {
    nlohmann::json j;
    j["check"] = c.check;
    j["value"] = c.value ? nlohmann::json(*c.value) : nlohmann::json(nullptr);
    j["tolerance"] = c.tolerance;
    j["pass"] = c.pass;
    if (!c.note.empty()) j["note"] = c.note;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

namespace {

struct InitOptions {
  ScenarioSpec spec;
  std::string x[4];
  std::string periods;
  std::string out = "snapshot.json";
  std::string manifest;
};

int cmd_init(const InitOptions& o) {
  ScenarioSpec spec = o.spec;
  for (int c = 0; c < 4; ++c) spec.expr[c] = o.x[c];
  if (!o.periods.empty()) {
    KeyValues kv{{"periods", o.periods}};
    spec.periods = manifest_from_key_values(kv).scenario.periods;
  }
  if (spec.name == "custom-expression")
    for (int c = 0; c < 4; ++c)
      if (spec.expr[c].empty()) throw Error(ErrorKind::InvalidArgument, "custom-expression needs --x1 .. --x4");
  const SurfaceGrid grid = build_immersion(spec);
  write_snapshot(grid, o.out);

  RunManifest m;
  m.scenario = spec;
  const std::filesystem::path snap(o.out);
  const std::string manifest_path = o.manifest.empty() ? (snap.parent_path() / (snap.stem().string() + ".manifest")).string() : o.manifest;
  const std::filesystem::path mdir = std::filesystem::absolute(manifest_path).parent_path();
  m.initial_snapshot = std::filesystem::relative(std::filesystem::absolute(snap), mdir).string();
  m.flow.steps = 100000;
  m.flow.max_H_below = 1e-6;
  m.platform = platform_fingerprint();
  write_manifest(m, manifest_path);

  const GeometryCache geom = compute_geometry(grid);
  std::printf("wrote %s (%zu nodes, area %s) and %s\n", o.out.c_str(), grid.size(), format_number(area(geom)).c_str(),
              manifest_path.c_str());
  return kOk;
}

int cmd_run(const std::string& manifest_path, const std::string& plot_dir) {
  const RunManifest m = read_manifest(manifest_path);
  SurfaceGrid grid = m.initial_snapshot ? read_snapshot(*m.initial_snapshot) : build_immersion(m.scenario);

  std::ofstream csv(m.output_series, std::ios::binary);
  if (!csv) throw Error(ErrorKind::Io, "cannot open '" + m.output_series + "' for writing");
  csv << series_header();
  Series2D log_energy, lam;
  auto sink = [&](const StepRecord& r) {
    csv << series_row(r);
    csv.flush();
    if (r.twistor_energy > 0.0) {
      log_energy.x.push_back(r.t);
      log_energy.y.push_back(std::log10(r.twistor_energy));
    }
    if (r.lambda1) {
      lam.x.push_back(r.t);
      lam.y.push_back(*r.lambda1);
    }
  };

  const FlowResult res = run_flow(m.flow, make_state(std::move(grid)), sink);
  if (!csv) throw Error(ErrorKind::Io, "write to '" + m.output_series + "' failed");
  write_snapshot(res.final_state.grid, m.output_snapshot);

  const std::string dir = !plot_dir.empty() ? plot_dir : m.output_plot_dir.value_or("");
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    write_text((std::filesystem::path(dir) / "twistor_energy.svg").string(),
               svg_line_plot(log_energy, "twistor energy", "t", "log10 T"));
    write_text((std::filesystem::path(dir) / "lambda1.svg").string(),
               svg_line_plot(lam, "first eigenvalue", "t", "lambda1"));
  }

  const StepRecord& last = res.series.back();
  std::printf("steps %zu  t %s  twistor_energy %s  max_H %s\n", res.series.size() - 1, format_number(last.t).c_str(),
              format_number(res.final_twistor_energy).c_str(), format_number(last.max_H).c_str());
  if (res.stopped_on_max_H)
    std::printf("stopped on max_H below threshold; phase spread %s rad\n", format_number(res.final_phase_spread).c_str());
  return kOk;
}

int cmd_check(const std::string& snapshot, const std::string& json_path) {
  const SurfaceGrid grid = read_snapshot(snapshot);
  const std::vector<CheckResult> checks = run_checks(grid);
  bool all = true;
  for (const CheckResult& c : checks) {
    all = all && c.pass;
    std::printf("%-28s %-4s value %-24s tol %s%s%s\n", c.check.c_str(), c.pass ? "ok" : "FAIL",
                c.value ? format_number(*c.value).c_str() : "n/a", format_number(c.tolerance).c_str(),
                c.note.empty() ? "" : "  # ", c.note.c_str());
  }
  if (!json_path.empty()) write_text(json_path, checks_to_json(checks));
  std::printf("%s\n", all ? "all checks passed" : "some checks failed");
  return all ? kOk : kNumerical;
}

int cmd_spectrum(const std::string& snapshot, std::size_t k, const std::string& dump) {
  const GeometryCache geom = compute_geometry(read_snapshot(snapshot));
  SpectralOptions opt;
  opt.block = std::max<std::size_t>(opt.block, k + 2);
  const SpectralResult sr = lambda1(geom, opt);
  std::printf("lambda1 %s\nresidual %s\niterations %zu\n", format_number(sr.lambda1).c_str(),
              format_number(sr.residual).c_str(), sr.iterations);
  for (std::size_t i = 0; i < k && i < sr.ritz_values.size(); ++i)
    std::printf("lambda[%zu] %s\n", i + 1, format_number(sr.ritz_values[i]).c_str());
  if (!dump.empty()) {
    std::string text = "node,i,j,f\n";
    for (std::size_t n = 0; n < geom.size(); ++n)
      text += std::to_string(n) + "," + std::to_string(n / geom.nv) + "," + std::to_string(n % geom.nv) + "," +
              format_number(sr.eigenfunction[n]) + "\n";
    write_text(dump, text);
  }
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Hyper-Lagrangian mean curvature flow laboratory"};
  app.require_subcommand(1);

  InitOptions init;
  CLI::App* ini = app.add_subcommand("init", "sample a scenario into a snapshot and a manifest stub");
  ini->add_option("--scenario", init.spec.name, "scenario name")->required();
  ini->add_option("--eps", init.spec.eps, "perturbation amplitude");
  ini->add_option("--R", init.spec.R, "first Clifford radius");
  ini->add_option("--r", init.spec.r, "second Clifford radius");
  ini->add_option("--Lu", init.spec.Lu, "flat torus side along u");
  ini->add_option("--Lv", init.spec.Lv, "flat torus side along v");
  for (int c = 0; c < 4; ++c)
    ini->add_option("--x" + std::to_string(c + 1), init.x[c], "custom-expression coordinate in u, v");
  ini->add_option("--periods", init.periods, "ambient torus periods p1,p2,p3,p4");
  ini->add_option("--nu", init.spec.nu, "nodes along u");
  ini->add_option("--nv", init.spec.nv, "nodes along v");
  ini->add_option("--out", init.out, "snapshot path");
  ini->add_option("--manifest", init.manifest, "manifest stub path");

  std::string run_manifest, plot_dir;
  CLI::App* run = app.add_subcommand("run", "integrate the coupled flow described by a manifest");
  run->add_option("manifest", run_manifest)->required();
  run->add_option("--plot", plot_dir, "directory for SVG plots");

  std::string check_snapshot, check_json;
  CLI::App* chk = app.add_subcommand("check", "run the invariant suites on a snapshot");
  chk->add_option("snapshot", check_snapshot)->required();
  chk->add_option("--json", check_json, "write the JSON report here");

  std::string spec_snapshot, spec_dump;
  std::size_t spec_k = 1;
  CLI::App* spc = app.add_subcommand("spectrum", "first Laplace-Beltrami eigenvalues of a snapshot");
  spc->add_option("snapshot", spec_snapshot)->required();
  spc->add_option("--k", spec_k, "number of eigenvalues to print")->check(CLI::Range(1, 32));
  spc->add_option("--dump", spec_dump, "write the first eigenfunction as CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*ini) return cmd_init(init);
    if (*run) return cmd_run(run_manifest, plot_dir);
    if (*chk) return cmd_check(check_snapshot, check_json);
    if (*spc) return cmd_spectrum(spec_snapshot, spec_k, spec_dump);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: io: %s\n", e.what());
    return kIo;
  }
  return kValidation;
}

}  // namespace hlmcf::cli
