#pragma once

// Coupled mean curvature flow of the immersion and heat flow of its phase,
// with per-step diagnostics.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hlmcf/phase.hpp"
#include "hlmcf/spectral.hpp"
#include "hlmcf/surface.hpp"

namespace hlmcf {

enum class Scheme { Euler, Rk2 };

struct DtPolicy {
  enum class Kind { Fixed, Cfl } kind = Kind::Cfl;
  double dt = 1e-3;     // Fixed
  double safety = 0.9;  // Cfl, in (0, 1]
};

struct FlowConfig {
  DtPolicy dt;
  Scheme scheme = Scheme::Euler;
  std::size_t steps = 1000;
  bool renormalize_phase = true;

  bool monitor_lambda1 = true;
  bool monitor_consistency = true;
  bool monitor_metric = true;
  std::size_t lambda1_cadence = 10;
  std::size_t consistency_cadence = 1;
  // stand-in for the unnamed dimensional constant of the twistor-energy and
  // eigenvalue estimates
  double c_mon = 8.0;

  std::optional<double> max_H_below;
  std::optional<double> t_final;

  void validate() const;
};

struct FlowState {
  SurfaceGrid grid;
  GeometryCache geom;
  PhaseField phase;
  double t = 0.0;
  // det g floor is measured against the initial surface
  double reference_mean_det = 0.0;
};

/// Geometry plus the canonical phase of the frames at t = 0.
FlowState make_state(SurfaceGrid grid);

struct StepRecord {
  std::size_t step = 0;
  double t = 0.0, dt = 0.0;
  double area = 0.0;
  double twistor_energy = 0.0;
  std::optional<double> lambda1;  // sampled
  double lambda1_interp = 0.0;    // sampled or interpolated
  double max_H = 0.0, max_A = 0.0, max_grad_a = 0.0;
  double min_a3 = 0.0;
  double hdp_margin = 0.0;
  double hdp_slack = 0.0;
  double h_g = 0.0;
  std::optional<double> efa_residual, efe_residual;
  std::optional<double> efa_tolerance, efe_tolerance;
  std::optional<double> metric_residual;
  double E_accum = 0.0;
  std::optional<double> consistency_error;
  double renormalization_drift = 0.0;
};

using DiagnosticsSeries = std::vector<StepRecord>;
using RecordSink = std::function<void(const StepRecord&)>;
/// Sees every state right after it is produced, the initial one included.
using StateObserver = std::function<void(const FlowState&, std::size_t step)>;

/// Metric grid spacing sqrt(min eig g) * min(hu, hv).
double metric_spacing(const GeometryCache& geom);
double cfl_dt(const GeometryCache& geom, double safety);

struct McfResult {
  SurfaceGrid grid;
  GeometryCache geom;
  double max_displacement = 0.0;
};

/// F <- F + dt H (or the midpoint rule); geometry recomputed, torus positions reduced.
McfResult mcf_step(const SurfaceGrid& grid, const GeometryCache& geom, double dt, Scheme scheme,
                   double reference_mean_det);

struct HeatStepResult {
  std::vector<Vec3> a;
  double drift = 0.0;        // max ||a + dt tau| - 1| before projection
  double drift_bound = 0.0;  // dt max|<a, tau>| + dt^2 max|tau|^2
};

/// a <- normalize(a + dt (Delta a + |grad a|^2 a)) on the given geometry.
HeatStepResult phase_heat_step(const PhaseField& pf, const GeometryCache& geom, double dt, bool renormalize = true);

/// Max-node distance between the frame phase of geom and the evolved field.
double consistency_check(const GeometryCache& geom, std::span<const Vec3> evolved);

/// max |(g' - g)/dt + 2 <H, f_ij>| over nodes and components, H and f_ij from `before`.
double metric_evolution_monitor(const GeometryCache& before, const GeometryCache& after, double dt);

/// Records with lambda1_interp filled in; evaluates the residual of
/// dT/dt <= (-2 lambda1 + C max|H| max|A| + 2 max|grad a|^2) T over [prev, cur].
double efa_monitor(const StepRecord& prev, const StepRecord& cur, double c_mon);
/// Residual of d lambda1/dt >= -(max|H|^2 + C max|H| max|A|) lambda1.
double efe_monitor(const StepRecord& prev, const StepRecord& cur, double c_mon);
/// Tolerance for both monitors over one step: (h_g^2 + 2 lambda1^2 dt) * value.
double monitor_tolerance(double h_g, double lambda1, double dt, double value);

struct StepOutcome {
  FlowState state;
  StepRecord record;
};

/// One coupled step (MCF, then the phase heat step on the new geometry) with
/// every per-step monitor evaluated. efa/efe need lambda1 and are filled by run_flow.
StepOutcome coupled_step(const FlowState& state, const FlowConfig& cfg, const StepRecord& previous);

/// Diagnostics of a state without stepping (the t = 0 row).
StepRecord initial_record(const FlowState& state);

struct FlowResult {
  DiagnosticsSeries series;
  FlowState final_state;
  bool stopped_on_max_H = false;
  double final_phase_spread = 0.0;
  double final_twistor_energy = 0.0;
};

/// Steps until a stop condition. Records reach `sink` in order, delayed until
/// the lambda1 sample that closes their interpolation interval. On an error the
/// buffered records are flushed and the error is rethrown with the step index.
FlowResult run_flow(const FlowConfig& cfg, FlowState state, const RecordSink& sink = {},
                    const StateObserver& observer = {});

struct DecayFit {
  double rate = 0.0;
  double r_squared = 0.0;
};

/// Least-squares slope of log T against t.
DecayFit decay_fit(std::span<const double> t, std::span<const double> energy);

}  // namespace hlmcf
