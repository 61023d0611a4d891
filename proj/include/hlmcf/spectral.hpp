#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hlmcf/surface.hpp"

namespace hlmcf {

struct SpectralResult {
  double lambda1 = 0.0;
  // L2(dmu)-normalized, mean zero
  std::vector<double> eigenfunction;
  std::size_t iterations = 0;
  // || Delta f + lambda1 f ||_{L2(dmu)}
  double residual = 0.0;
  // next Ritz value, for gap reporting
  double lambda2 = 0.0;
  // the k smallest nonzero Ritz values
  std::vector<double> ritz_values;
};

struct SpectralOptions {
  double tolerance = 1e-10;       // relative change of lambda1 between sweeps
  double residual_target = 1e-9;  // relative to max(1, lambda1)
  std::size_t max_iterations = 10000;
  std::size_t block = 8;
};

/// Smallest nonzero eigenvalue of -Delta by shift-invert subspace iteration
/// with the constants deflated in the area-weighted inner product. `warm`,
/// when given, seeds the subspace and receives the converged one, so
/// successive calls along a flow reuse it.
SpectralResult lambda1(const GeometryCache& cache, const SpectralOptions& options = {},
                       Eigen::MatrixXd* warm = nullptr);

struct BallSample {
  std::size_t center = 0;
  double radius = 0.0;
  double volume = 0.0;
  double ratio = 0.0;  // volume / radius^2
};

struct CollapseReport {
  double kappa = 0.0;
  double scale = 0.0;  // largest sampled radius
  std::vector<BallSample> samples;
};

/// Dijkstra distances on the 16-neighbour grid graph (edges (1,0), (1,1),
/// (2,1) and their symmetric images) with lengths measured in the averaged
/// endpoint metric. Ball volume integrates a one-cell-wide smoothed indicator
/// of {d < radius}.
std::vector<double> geodesic_distances(const GeometryCache& cache, std::size_t source);

/// Half the shortest coordinate loop, a lower proxy for the diameter.
double diameter_proxy(const GeometryCache& cache);

/// 4 x 4 sublattice of centres.
std::vector<std::size_t> default_centers(const GeometryCache& cache);

CollapseReport geodesic_ball_volumes(const GeometryCache& cache, std::span<const std::size_t> centers,
                                     std::span<const double> radii);

struct C0Bound {
  double bound = 0.0;
  double max_observed = 0.0;
  bool holds = false;
  double lipschitz = 0.0;  // measured max |grad sigma|
  double epsilon = 0.0;    // integral of sigma^2
};

/// max over nodes of |grad sigma|_g.
double section_lipschitz(std::span<const double> sigma, const GeometryCache& cache);

/// max |sigma| <= (Lambda + kappa^{-1/2}) eps^{1/4} on a surface that is
/// kappa-noncollapsed on scale r, for eps = int sigma^2 <= r^4.
C0Bound c0_from_l2_validator(std::span<const double> sigma, double Lambda, const GeometryCache& cache,
                             const CollapseReport& collapse);

}  // namespace hlmcf
