#include "hlmcf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "hlmcf/error.hpp"

namespace hlmcf {

namespace {

const hk::TwistorTriple& triple() {
  static const hk::TwistorTriple t = hk::standard_twistor_triple();
  return t;
}

double curvature_rate(const StepRecord& r) { return r.max_H * r.max_H + r.max_A * r.max_H; }

void fill_diagnostics(StepRecord& rec, const FlowState& s) {
  const GeometryCache& g = s.geom;
  const PhaseField& pf = s.phase;
  rec.t = s.t;
  rec.area = area(g);
  rec.twistor_energy = twistor_energy(pf, g);
  double mh = 0.0, ma = 0.0, mg = 0.0, a3 = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < g.size(); ++n) {
    mh = std::max(mh, g.nodes[n].norm_H_sq);
    ma = std::max(ma, g.nodes[n].norm_A_sq);
    mg = std::max(mg, pf.energy_density[n]);
    a3 = std::min(a3, pf.a[n][2]);
  }
  rec.max_H = std::sqrt(mh);
  rec.max_A = std::sqrt(ma);
  rec.max_grad_a = std::sqrt(mg);
  rec.min_a3 = a3;
  const std::vector<double> margin = hdp_margin(g, pf);
  rec.hdp_margin = *std::min_element(margin.begin(), margin.end());
  rec.hdp_slack = hdp_slack(g, pf);
  rec.h_g = metric_spacing(g);
}

}  // namespace

void FlowConfig::validate() const {
  if (dt.kind == DtPolicy::Kind::Fixed && !(dt.dt > 0.0)) throw Error(ErrorKind::BadConfig, "dt must be positive");
  if (dt.kind == DtPolicy::Kind::Cfl && !(dt.safety > 0.0 && dt.safety <= 1.0))
    throw Error(ErrorKind::BadConfig, "cfl safety must lie in (0, 1]");
  if (lambda1_cadence == 0 || consistency_cadence == 0) throw Error(ErrorKind::BadConfig, "cadences must be positive");
  if (max_H_below && !(*max_H_below > 0.0)) throw Error(ErrorKind::BadConfig, "max_H_below must be positive");
  if (t_final && !(*t_final > 0.0)) throw Error(ErrorKind::BadConfig, "t_final must be positive");
  if (!(c_mon >= 0.0)) throw Error(ErrorKind::BadConfig, "c_mon must be nonnegative");
}

FlowState make_state(SurfaceGrid grid) {
  FlowState s;
  s.geom = compute_geometry(grid);
  s.reference_mean_det = s.geom.mean_det_g;
  s.phase = phase_field(s.geom, triple());
  s.grid = std::move(grid);
  return s;
}

double metric_spacing(const GeometryCache& geom) {
  double lo = std::numeric_limits<double>::infinity();
  for (const NodeGeometry& ng : geom.nodes) {
    const double tr = ng.g(0, 0) + ng.g(1, 1);
    const double d = ng.g(0, 0) - ng.g(1, 1);
    lo = std::min(lo, 0.5 * (tr - std::sqrt(d * d + 4.0 * ng.g(0, 1) * ng.g(0, 1))));
  }
  return std::sqrt(lo) * std::min(geom.hu, geom.hv);
}

double cfl_dt(const GeometryCache& geom, double safety) {
  const double h = metric_spacing(geom);
  double a2 = 0.0;
  for (const NodeGeometry& ng : geom.nodes) a2 = std::max(a2, ng.norm_A_sq);
  return safety * h * h / (4.0 * (1.0 + a2 * h * h));
}

McfResult mcf_step(const SurfaceGrid& grid, const GeometryCache& geom, double dt, Scheme scheme,
                   double reference_mean_det) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  std::vector<Vec4> velocity(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) velocity[n] = geom.nodes[n].H;
  if (scheme == Scheme::Rk2) {
    SurfaceGrid half = grid;
    for (std::size_t n = 0; n < grid.size(); ++n)
      half.positions[n] = grid.ambient.reduce(grid.positions[n] + 0.5 * dt * velocity[n]);
    const GeometryCache mid = compute_geometry(half, reference_mean_det);
    for (std::size_t n = 0; n < grid.size(); ++n) velocity[n] = mid.nodes[n].H;
  }

  McfResult out;
  for (const Vec4& v : velocity) out.max_displacement = std::max(out.max_displacement, dt * v.norm());
  const double limit = 0.25 * min_edge_length(grid);
  if (!(out.max_displacement <= limit))
    throw Error(ErrorKind::StabilityViolation, "node displacement " + std::to_string(out.max_displacement) +
                                                   " exceeds 0.25 x min edge " + std::to_string(4.0 * limit));
  out.grid = grid;
  for (std::size_t n = 0; n < grid.size(); ++n)
    out.grid.positions[n] = grid.ambient.reduce(grid.positions[n] + dt * velocity[n]);
  out.geom = compute_geometry(out.grid, reference_mean_det);
  return out;
}

HeatStepResult phase_heat_step(const PhaseField& pf, const GeometryCache& geom, double dt, bool renormalize) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  const double h = metric_spacing(geom);
  if (dt > 0.25 * h * h)
    throw Error(ErrorKind::StabilityViolation,
                "phase step dt " + std::to_string(dt) + " above the parabolic limit " + std::to_string(0.25 * h * h));
  // Differences are taken on the geometry the step runs on.
  const PhaseField on_geom = phase_field_from(pf.a, geom);
  const std::vector<Vec3> tau = tension_field(on_geom, geom);
  HeatStepResult out;
  out.a.resize(pf.size());
  double tangential = 0.0, tau_sq = 0.0;
  for (std::size_t n = 0; n < pf.size(); ++n) {
    const Vec3 x = on_geom.a[n] + dt * tau[n];
    out.drift = std::max(out.drift, std::abs(x.norm() - 1.0));
    tangential = std::max(tangential, std::abs(on_geom.a[n].dot(tau[n])));
    tau_sq = std::max(tau_sq, tau[n].squaredNorm());
    out.a[n] = renormalize ? Vec3(x.normalized()) : x;
    if (!out.a[n].allFinite()) throw Error(ErrorKind::NonFinite, "phase became non-finite");
  }
  out.drift_bound = dt * tangential + dt * dt * tau_sq;
  return out;
}

double consistency_check(const GeometryCache& geom, std::span<const Vec3> evolved) {
  if (evolved.size() != geom.size()) throw Error(ErrorKind::ShapeMismatch, "evolved phase does not match grid");
  double worst = 0.0;
  for (std::size_t n = 0; n < geom.size(); ++n) {
    const NodeGeometry& ng = geom.nodes[n];
    const Vec3 a = hk::canonical_phase_from_frame(ng.e1, ng.e2, ng.e3, ng.e4, triple()).vec();
    worst = std::max(worst, (a - evolved[n]).norm());
  }
  return worst;
}

double metric_evolution_monitor(const GeometryCache& before, const GeometryCache& after, double dt) {
  if (before.size() != after.size()) throw Error(ErrorKind::ShapeMismatch, "geometries differ in size");
  double worst = 0.0;
  for (std::size_t n = 0; n < before.size(); ++n) {
    const NodeGeometry& b = before.nodes[n];
    const Vec4* fij[2][2] = {{&b.fuu, &b.fuv}, {&b.fuv, &b.fvv}};
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) {
        const double rate = (after.nodes[n].g(i, j) - b.g(i, j)) / dt;
        worst = std::max(worst, std::abs(rate + 2.0 * b.H.dot(*fij[i][j])));
      }
  }
  return worst;
}

double efa_monitor(const StepRecord& prev, const StepRecord& cur, double c_mon) {
  const double dt = cur.t - prev.t;
  if (!(dt > 0.0)) throw Error(ErrorKind::InsufficientRecords, "efa monitor needs two records at distinct times");
  auto rhs = [c_mon](const StepRecord& r) {
    return (-2.0 * r.lambda1_interp + c_mon * r.max_H * r.max_A + 2.0 * r.max_grad_a * r.max_grad_a) *
           r.twistor_energy;
  };
  const double slope = (cur.twistor_energy - prev.twistor_energy) / dt;
  return std::max(0.0, slope - 0.5 * (rhs(prev) + rhs(cur)));
}

double efe_monitor(const StepRecord& prev, const StepRecord& cur, double c_mon) {
  const double dt = cur.t - prev.t;
  if (!(dt > 0.0)) throw Error(ErrorKind::InsufficientRecords, "efe monitor needs two records at distinct times");
  auto rhs = [c_mon](const StepRecord& r) {
    return (r.max_H * r.max_H + c_mon * r.max_H * r.max_A) * r.lambda1_interp;
  };
  const double slope = (cur.lambda1_interp - prev.lambda1_interp) / dt;
  return std::max(0.0, -slope - 0.5 * (rhs(prev) + rhs(cur)));
}

double monitor_tolerance(double h_g, double lambda1, double dt, double value) {
  return (h_g * h_g + 2.0 * lambda1 * lambda1 * dt) * std::abs(value);
}

StepRecord initial_record(const FlowState& state) {
  StepRecord rec;
  fill_diagnostics(rec, state);
  return rec;
}

StepOutcome coupled_step(const FlowState& state, const FlowConfig& cfg, const StepRecord& previous) {
  double dt = cfg.dt.kind == DtPolicy::Kind::Cfl ? cfl_dt(state.geom, cfg.dt.safety) : cfg.dt.dt;
  if (cfg.t_final && state.t + dt > *cfg.t_final) dt = *cfg.t_final - state.t;
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "no time left to step");

  McfResult mcf = mcf_step(state.grid, state.geom, dt, cfg.scheme, state.reference_mean_det);
  HeatStepResult heat = phase_heat_step(state.phase, mcf.geom, dt, cfg.renormalize_phase);
  // The bound is an identity for the update; failing it means corrupted arithmetic.
  if (!(heat.drift <= heat.drift_bound * (1.0 + 1e-9) + 1e-15))
    throw Error(ErrorKind::StabilityViolation, "phase renormalization drift " + std::to_string(heat.drift) +
                                                   " above bound " + std::to_string(heat.drift_bound));

  StepOutcome out;
  StepRecord& rec = out.record;
  rec.step = previous.step + 1;
  rec.dt = dt;
  if (cfg.monitor_metric) rec.metric_residual = metric_evolution_monitor(state.geom, mcf.geom, dt);

  FlowState& next = out.state;
  next.grid = std::move(mcf.grid);
  next.geom = std::move(mcf.geom);
  next.phase = phase_field_from(std::move(heat.a), next.geom);
  next.t = state.t + dt;
  next.reference_mean_det = state.reference_mean_det;

  fill_diagnostics(rec, next);
  rec.renormalization_drift = heat.drift;
  rec.E_accum = previous.E_accum + 0.5 * dt * (curvature_rate(previous) + curvature_rate(rec));
  if (cfg.monitor_consistency && rec.step % cfg.consistency_cadence == 0)
    rec.consistency_error = consistency_check(next.geom, next.phase.a);
  return out;
}

FlowResult run_flow(const FlowConfig& cfg, FlowState state, const RecordSink& sink, const StateObserver& observer) {
  cfg.validate();
  FlowResult result;
  Eigen::MatrixXd warm;
  std::deque<StepRecord> pending;
  StepRecord last_emitted;
  bool have_emitted = false;

  auto emit = [&](StepRecord rec) {
    if (have_emitted && cfg.monitor_lambda1) {
      rec.efa_residual = efa_monitor(last_emitted, rec, cfg.c_mon);
      rec.efe_residual = efe_monitor(last_emitted, rec, cfg.c_mon);
      rec.efa_tolerance = monitor_tolerance(rec.h_g, rec.lambda1_interp, rec.dt,
                                            std::max(last_emitted.twistor_energy, rec.twistor_energy));
      rec.efe_tolerance = monitor_tolerance(rec.h_g, rec.lambda1_interp, rec.dt,
                                            std::max(last_emitted.lambda1_interp, rec.lambda1_interp));
    }
    if (sink) sink(rec);
    result.series.push_back(rec);
    last_emitted = rec;
    have_emitted = true;
  };
  // Interpolate lambda1 over the buffered records up to the new sample, then release them.
  auto release = [&](double lam, double t) {
    const double t0 = last_emitted.t, l0 = last_emitted.lambda1_interp;
    while (!pending.empty()) {
      StepRecord rec = pending.front();
      pending.pop_front();
      const double w = t > t0 ? (rec.t - t0) / (t - t0) : 1.0;
      rec.lambda1_interp = l0 + w * (lam - l0);
      emit(rec);
    }
  };
  auto stop_reached = [&](const StepRecord& r, std::size_t k) {
    const bool below = cfg.max_H_below && r.max_H < *cfg.max_H_below;
    if (below) result.stopped_on_max_H = true;
    const bool at_end = cfg.t_final && r.t >= *cfg.t_final;
    return below || at_end || k >= cfg.steps;
  };

  StepRecord rec = initial_record(state);
  std::size_t k = 0;
  try {
    if (cfg.monitor_lambda1) {
      rec.lambda1 = lambda1(state.geom, {}, &warm).lambda1;
      rec.lambda1_interp = *rec.lambda1;
    }
    emit(rec);
    if (observer) observer(state, 0);
    bool stop = stop_reached(rec, 0);
    StepRecord previous = rec;
    while (!stop) {
      ++k;
      StepOutcome o = coupled_step(state, cfg, previous);
      state = std::move(o.state);
      if (observer) observer(state, k);
      StepRecord cur = o.record;
      stop = stop_reached(cur, k);
      previous = cur;
      if (!cfg.monitor_lambda1) {
        emit(cur);
        continue;
      }
      pending.push_back(cur);
      if (k % cfg.lambda1_cadence == 0 || stop) {
        const double lam = lambda1(state.geom, {}, &warm).lambda1;
        pending.back().lambda1 = lam;
        release(lam, cur.t);
      }
    }
  } catch (const Error& e) {
    // Partial series: lambda1 is unknown past the last sample, so no efa/efe.
    while (!pending.empty()) {
      StepRecord r = pending.front();
      pending.pop_front();
      r.lambda1_interp = last_emitted.lambda1_interp;
      if (sink) sink(r);
      result.series.push_back(r);
    }
    const StepRecord& last = result.series.back();
    std::string detail = e.what();
    const std::string prefix = std::string(to_string(e.kind())) + ": ";
    if (detail.starts_with(prefix)) detail.erase(0, prefix.size());
    throw Error(e.kind(), "step " + std::to_string(k) + ": " + detail + " [t=" + std::to_string(last.t) +
                              " area=" + std::to_string(last.area) + " max_H=" + std::to_string(last.max_H) +
                              " max_A=" + std::to_string(last.max_A) + "]");
  }

  result.final_twistor_energy = twistor_energy(state.phase, state.geom);
  result.final_phase_spread = phase_spread(state.phase, state.geom);
  result.final_state = std::move(state);
  return result;
}

DecayFit decay_fit(std::span<const double> t, std::span<const double> energy) {
  if (t.size() != energy.size()) throw Error(ErrorKind::ShapeMismatch, "time and energy lengths differ");
  if (t.size() < 10) throw Error(ErrorKind::InsufficientSamples, "decay fit needs at least 10 samples");
  for (double e : energy)
    if (!(e > 0.0)) throw Error(ErrorKind::NonpositiveEnergy, "decay fit needs positive energies");
  const double n = static_cast<double>(t.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    mt += t[k];
    my += std::log(energy[k]);
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double dt = t[k] - mt, dy = std::log(energy[k]) - my;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  if (!(stt > 0.0)) throw Error(ErrorKind::InsufficientSamples, "decay fit needs distinct times");
  DecayFit fit;
  fit.rate = sty / stt;
  const double ss_res = syy - fit.rate * sty;
  fit.r_squared = syy > 0.0 ? 1.0 - std::max(0.0, ss_res) / syy : 1.0;
  return fit;
}

}  // namespace hlmcf
