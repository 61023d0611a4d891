#pragma once

// The canonical S^2-valued phase of a surface in flat R^4 / T^4 and the
// quantities built from it.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "hlmcf/hk_kernel.hpp"
#include "hlmcf/surface.hpp"

namespace hlmcf {

struct PhaseField {
  std::vector<Vec3> a;
  // grad[n] = {d_u a, d_v a}
  std::vector<std::array<Vec3, 2>> grad;
  // g^ij <d_i a, d_j a>
  std::vector<double> energy_density;

  std::size_t size() const { return a.size(); }
};

/// Canonical phase of every node frame, renormalized and differentiated.
PhaseField phase_field(const GeometryCache& cache, const hk::TwistorTriple& t);

/// Wraps an arbitrary coefficient field: normalizes each node, then differences.
PhaseField phase_field_from(std::vector<Vec3> a, const GeometryCache& cache);

double twistor_energy(const PhaseField& pf, const GeometryCache& cache);

/// Delta a + |grad a|^2 a.
std::vector<Vec3> tension_field(const PhaseField& pf, const GeometryCache& cache);

/// arccos(a_axis) per node.
std::vector<double> kahler_angle(const PhaseField& pf, int axis = 3);

struct LagrangianAngle {
  std::vector<double> theta;  // unwrapped
  double exactness_residual = 0.0;
  // net winding of theta around the u and v period loops
  long winding_u = 0, winding_v = 0;
};

inline constexpr double kLagrangianTolerance = 0.05;
inline constexpr double kPoleMargin = 0.05;

/// Requires max |a_axis| < kLagrangianTolerance. theta = atan2(a_q, a_p) for
/// (p, q, axis) = reference_axes(axis); the residual is the L2 norm of the
/// one-form omega_axis(H, .) + d theta.
LagrangianAngle lagrangian_angle(const PhaseField& pf, const GeometryCache& cache, int axis = 3);

/// Unit vector orthogonal to a: z x a, or x x a near the z poles.
Vec3 orthogonal_phase(const Vec3& a);

struct PlfResult {
  std::vector<double> residual;   // |i_H Omega + 2i d''Theta| over the adapted tangent pair
  std::vector<double> magnitude;  // max(|i_H Omega|, |2 d''Theta|), the scale of each side
};

PlfResult plf_residual(const GeometryCache& cache, const PhaseField& pf, const hk::TwistorTriple& t);

struct BjaResult {
  std::vector<double> lhs;  // 4 |grad a|^2
  std::vector<double> rhs;  // second fundamental form expression in the adapted frame
  double max_ratio = 0.0;   // max |grad a| / |A| over curved nodes
};

BjaResult bja_identity(const GeometryCache& cache, const PhaseField& pf, const hk::TwistorTriple& t);

/// Residual of |grad a|^2 = sin^2(phi) |grad theta|^2 + |grad phi|^2 in the
/// polar chart about `axis`, with theta and phi differenced on the grid.
std::vector<double> polar_identity_check(const PhaseField& pf, const GeometryCache& cache, int axis = 3);

/// max(|Re|, |Im|) of Omega_{a} on (e1, e2) per node.
std::vector<double> hyper_lagrangian_residual(const GeometryCache& cache, const PhaseField& pf,
                                              const hk::TwistorTriple& t);

/// 2 |grad a|^2 - |H|^2 per node.
std::vector<double> hdp_margin(const GeometryCache& cache, const PhaseField& pf);

/// Discretization slack for the pointwise |H|^2 <= 2 |grad a|^2 comparison.
double hdp_slack(const GeometryCache& cache, const PhaseField& pf);

/// Area-weighted mean direction of a, normalized.
Vec3 mean_direction(const PhaseField& pf, const GeometryCache& cache);

/// Max angular distance (radians) of a from its mean direction.
double phase_spread(const PhaseField& pf, const GeometryCache& cache);

}  // namespace hlmcf
