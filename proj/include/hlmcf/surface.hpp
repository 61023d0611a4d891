#pragma once

// Doubly periodic grid immersions T^2 -> R^4 or T^4 and their discrete
// extrinsic geometry. Parameter domain is [0, 2pi)^2, node n = i * nv + j.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hlmcf/hk_kernel.hpp"
#include "hlmcf/simd/kernels.hpp"

namespace hlmcf {

using Mat2 = Eigen::Matrix2d;

struct ScenarioSpec {
  std::string name = "flat-plane-torus";
  std::size_t nu = 64, nv = 64;
  double eps = 0.05;
  double R = 1.0, r = 1.0;
  // flat-plane-torus side lengths
  double Lu = 6.283185307179586, Lv = 6.283185307179586;
  // custom-expression: one expression per ambient coordinate
  std::array<std::string, 4> expr;
  std::optional<Vec4> periods;
};

/// Names accepted by build_immersion.
const std::vector<std::string>& scenario_names();

struct SurfaceGrid {
  std::size_t nu = 0, nv = 0;
  std::vector<Vec4> positions;
  hk::AmbientSpace ambient;

  std::size_t size() const { return nu * nv; }
  double hu() const;
  double hv() const;
  std::size_t index(std::size_t i, std::size_t j) const { return i * nv + j; }
};

SurfaceGrid build_immersion(const ScenarioSpec& scenario);

struct NodeGeometry {
  Vec4 fu, fv, fuu, fuv, fvv;
  // g from edge vectors: g_ii = (|dF+|^2 + |dF-|^2) / (2 h_i^2), g_uv = <f_u, f_v>
  Mat2 g, ginv;
  double sqrt_det_g = 0.0;
  Vec4 e1, e2, e3, e4;
  // h[a][i][j] = <f_ij, e_{a+3}> in coordinate indices
  double h[2][2][2] = {};
  Vec4 H;
  double norm_A_sq = 0.0;
  double norm_H_sq = 0.0;
};

struct GeometryCache {
  std::size_t nu = 0, nv = 0;
  double hu = 0.0, hv = 0.0;
  double mean_det_g = 0.0;
  std::vector<NodeGeometry> nodes;
  // symmetric flux-form operator D with Laplace-Beltrami = D / sqrt(det g)
  simd::Stencil9 stiffness;
  std::vector<double> inv_sqrt_det_g;

  std::size_t size() const { return nodes.size(); }
  const NodeGeometry& operator[](std::size_t n) const { return nodes[n]; }
};

/// Metric degeneracy threshold relative to a reference mean det g.
inline constexpr double kDetFloorFactor = 1e-10;

/// reference_mean_det: mean det g that det_floor is measured against
/// (defaults to the grid's own mean).
GeometryCache compute_geometry(const SurfaceGrid& s, std::optional<double> reference_mean_det = {});

void laplace_beltrami(std::span<const double> field, const GeometryCache& cache, std::span<double> out);
std::vector<double> laplace_beltrami(std::span<const double> field, const GeometryCache& cache);
std::vector<Vec3> laplace_beltrami(std::span<const Vec3> field, const GeometryCache& cache);

double surface_integral(std::span<const double> density, const GeometryCache& cache);
double area(const GeometryCache& cache);

/// |K_intrinsic - K_extrinsic| per node, intrinsic from the Brioschi formula.
std::vector<double> gauss_curvature_check(const GeometryCache& cache);

/// Shortest u or v grid edge measured in the ambient metric.
double min_edge_length(const SurfaceGrid& s);

/// Central parameter-space derivatives of a per-node field.
template <class T>
void central_gradient(std::span<const T> f, std::size_t nu, std::size_t nv, double hu, double hv,
                      std::size_t i, std::size_t j, T& du, T& dv) {
  const std::size_t ip = (i + 1) % nu, im = (i + nu - 1) % nu;
  const std::size_t jp = (j + 1) % nv, jm = (j + nv - 1) % nv;
  du = (f[ip * nv + j] - f[im * nv + j]) / (2.0 * hu);
  dv = (f[i * nv + jp] - f[i * nv + jm]) / (2.0 * hv);
}

}  // namespace hlmcf
