#include "hlmcf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include <Eigen/Sparse>

#include "hlmcf/error.hpp"
#include "hlmcf/simd/kernels.hpp"

namespace hlmcf {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

// -D as a sparse matrix (weights from the stencil, duplicates summed on tiny grids).
SpMat assemble_stiffness(const GeometryCache& c) {
  using T = simd::Stencil9;
  const std::size_t nu = c.nu, nv = c.nv;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * c.size());
  for (std::size_t i = 0; i < nu; ++i) {
    const std::size_t rows[3] = {i, (i + 1) % nu, (i + nu - 1) % nu};
    for (std::size_t j = 0; j < nv; ++j) {
      const std::size_t cols[3] = {j, (j + 1) % nv, (j + nv - 1) % nv};
      const std::size_t n = i * nv + j;
      // tap -> (row offset index, col offset index)
      static constexpr int map[T::kTaps][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {2, 0},
                                               {1, 1}, {1, 2}, {2, 1}, {2, 2}};
      for (int t = 0; t < T::kTaps; ++t) {
        const std::size_t m = rows[map[t][0]] * nv + cols[map[t][1]];
        trip.emplace_back(static_cast<int>(n), static_cast<int>(m), -c.stiffness.w[t][n]);
      }
    }
  }
  SpMat K(static_cast<int>(c.size()), static_cast<int>(c.size()));
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

void apply_stiffness(const GeometryCache& c, const double* x, double* y) {
  const std::size_t N = c.size();
  simd::stencil_apply(c.stiffness, std::span<const double>(x, N), std::span<double>(y, N));
  for (std::size_t n = 0; n < N; ++n) y[n] = -y[n];
}

MatrixXd initial_block(const GeometryCache& c, std::size_t b) {
  const std::size_t N = c.size();
  MatrixXd X(N, b);
  std::mt19937_64 rng(0x5eed);
  for (std::size_t n = 0; n < N; ++n) {
    const double u = static_cast<double>(n / c.nv) * c.hu, v = static_cast<double>(n % c.nv) * c.hv;
    const double trig[4] = {std::cos(u), std::sin(u), std::cos(v), std::sin(v)};
    for (std::size_t k = 0; k < b; ++k)
      X(n, k) = k < 4 ? trig[k] : static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  }
  return X;
}

}  // namespace

SpectralResult lambda1(const GeometryCache& c, const SpectralOptions& opt, Eigen::MatrixXd* warm) {
  const std::size_t N = c.size();
  const std::size_t b = std::min(opt.block, N - 1);
  if (b < 2) throw Error(ErrorKind::InvalidArgument, "grid too small for the eigensolver");

  VectorXd S(N);
  for (std::size_t n = 0; n < N; ++n) S[n] = c.nodes[n].sqrt_det_g;
  const double total = S.sum();

  const SpMat K = assemble_stiffness(c);
  const double shift = 1e-6 * K.diagonal().sum() / total;
  SpMat M = K;
  for (int n = 0; n < static_cast<int>(N); ++n) M.coeffRef(n, n) += shift * S[n];
  Eigen::SimplicialLDLT<SpMat> solver(M);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::MetricDegenerate, "stiffness factorization failed");

  MatrixXd X = (warm && warm->rows() == static_cast<Eigen::Index>(N) && warm->cols() == static_cast<Eigen::Index>(b))
                   ? *warm
                   : initial_block(c, b);
  MatrixXd Y(N, b), KY(N, b);
  VectorXd ritz;
  double previous = std::numeric_limits<double>::infinity();
  SpectralResult out;

  auto deflate = [&](MatrixXd& Z) {
    for (Eigen::Index k = 0; k < Z.cols(); ++k) {
      const double mean = simd::dot(std::span<const double>(S.data(), N), std::span<const double>(Z.col(k).data(), N)) / total;
      Z.col(k).array() -= mean;
    }
  };
  deflate(X);

  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    const MatrixXd SX = S.asDiagonal() * X;
    for (std::size_t k = 0; k < b; ++k) Y.col(k) = solver.solve(SX.col(k));
    deflate(Y);
    for (std::size_t k = 0; k < b; ++k) apply_stiffness(c, Y.col(k).data(), KY.col(k).data());
    MatrixXd A = Y.transpose() * KY;
    A = 0.5 * (A + A.transpose()).eval();
    const MatrixXd B = Y.transpose() * S.asDiagonal() * Y;
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ge(A, B);
    if (ge.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "Rayleigh-Ritz step failed");
    ritz = ge.eigenvalues();
    X = Y * ge.eigenvectors();

    const double lam = ritz[0];
    VectorXd x = X.col(0);
    VectorXd Kx(N);
    apply_stiffness(c, x.data(), Kx.data());
    // Delta f + lambda f = (lambda S x - K x) / sqrt(g); x^T S x = 1
    double res2 = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const double r = (lam * S[n] * x[n] - Kx[n]) / S[n];
      res2 += r * r * S[n];
    }
    const double residual = std::sqrt(res2);  // the hu hv factors cancel against f = x / sqrt(hu hv)
    const bool settled = std::abs(lam - previous) <= opt.tolerance * std::abs(lam);
    previous = lam;
    out.iterations = it;
    if (settled && residual <= opt.residual_target * std::max(1.0, lam)) {
      out.lambda1 = lam;
      out.lambda2 = ritz.size() > 1 ? ritz[1] : lam;
      out.residual = residual;
      out.ritz_values.assign(ritz.data(), ritz.data() + ritz.size());
      const double scale = 1.0 / std::sqrt(c.hu * c.hv);
      out.eigenfunction.resize(N);
      for (std::size_t n = 0; n < N; ++n) out.eigenfunction[n] = x[n] * scale;
      if (warm) *warm = X;
      if (!(lam > 0.0)) throw Error(ErrorKind::NoConvergence, "nonpositive first eigenvalue");
      return out;
    }
  }
  const double gap = ritz.size() > 1 ? ritz[1] - ritz[0] : 0.0;
  throw Error(ErrorKind::NoConvergence, "lambda1 did not settle in " + std::to_string(opt.max_iterations) +
                                            " sweeps (Ritz gap estimate " + std::to_string(gap) + ")");
}

std::vector<double> geodesic_distances(const GeometryCache& c, std::size_t source) {
  static constexpr int offsets[16][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1}, {1, 1},  {1, -1},
                                         {-1, 1}, {-1, -1}, {1, 2}, {1, -2}, {-1, 2}, {-1, -2},
                                         {2, 1},  {2, -1}, {-2, 1}, {-2, -1}};
  const long nu = static_cast<long>(c.nu), nv = static_cast<long>(c.nv);
  std::vector<double> dist(c.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, n] = queue.top();
    queue.pop();
    if (d > dist[n]) continue;
    const long i = static_cast<long>(n) / nv, j = static_cast<long>(n) % nv;
    for (const auto& o : offsets) {
      const std::size_t m = static_cast<std::size_t>(((i + o[0]) % nu + nu) % nu * nv + ((j + o[1]) % nv + nv) % nv);
      const Eigen::Vector2d step(o[0] * c.hu, o[1] * c.hv);
      const Mat2 g = 0.5 * (c.nodes[n].g + c.nodes[m].g);
      const double nd = d + std::sqrt(step.dot(g * step));
      if (nd < dist[m]) {
        dist[m] = nd;
        queue.emplace(nd, m);
      }
    }
  }
  return dist;
}

double diameter_proxy(const GeometryCache& c) {
  double shortest = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < c.nv; ++j) {
    double len = 0.0;
    for (std::size_t i = 0; i < c.nu; ++i) {
      const std::size_t n = i * c.nv + j, m = ((i + 1) % c.nu) * c.nv + j;
      len += c.hu * std::sqrt(0.5 * (c.nodes[n].g(0, 0) + c.nodes[m].g(0, 0)));
    }
    shortest = std::min(shortest, len);
  }
  for (std::size_t i = 0; i < c.nu; ++i) {
    double len = 0.0;
    for (std::size_t j = 0; j < c.nv; ++j) {
      const std::size_t n = i * c.nv + j, m = i * c.nv + (j + 1) % c.nv;
      len += c.hv * std::sqrt(0.5 * (c.nodes[n].g(1, 1) + c.nodes[m].g(1, 1)));
    }
    shortest = std::min(shortest, len);
  }
  return 0.5 * shortest;
}

std::vector<std::size_t> default_centers(const GeometryCache& c) {
  std::vector<std::size_t> centers;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) centers.push_back((a * c.nu / 4) * c.nv + b * c.nv / 4);
  return centers;
}

CollapseReport geodesic_ball_volumes(const GeometryCache& c, std::span<const std::size_t> centers,
                                     std::span<const double> radii) {
  if (centers.empty() || radii.empty()) throw Error(ErrorKind::InvalidArgument, "no ball samples requested");
  const double limit = 0.5 * diameter_proxy(c);
  for (double r : radii) {
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "radii must be positive");
    if (r >= limit)
      throw Error(ErrorKind::RadiusTooLarge,
                  "radius " + std::to_string(r) + " exceeds half the diameter proxy " + std::to_string(limit));
  }
  for (std::size_t n : centers)
    if (n >= c.size()) throw Error(ErrorKind::InvalidArgument, "ball centre outside the grid");

  std::vector<double> cell(c.size()), width(c.size());
  for (std::size_t n = 0; n < c.size(); ++n) {
    cell[n] = c.nodes[n].sqrt_det_g * c.hu * c.hv;
    width[n] = std::sqrt(cell[n]);
  }

  CollapseReport rep;
  rep.kappa = std::numeric_limits<double>::infinity();
  rep.scale = *std::max_element(radii.begin(), radii.end());
  for (std::size_t center : centers) {
    const std::vector<double> d = geodesic_distances(c, center);
    for (double r : radii) {
      double vol = 0.0;
      for (std::size_t n = 0; n < c.size(); ++n) vol += std::clamp((r - d[n]) / width[n] + 0.5, 0.0, 1.0) * cell[n];
      const BallSample s{center, r, vol, vol / (r * r)};
      rep.kappa = std::min(rep.kappa, s.ratio);
      rep.samples.push_back(s);
    }
  }
  return rep;
}

double section_lipschitz(std::span<const double> sigma, const GeometryCache& c) {
  if (sigma.size() != c.size()) throw Error(ErrorKind::ShapeMismatch, "section does not match grid");
  double lip = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) {
    double du, dv;
    central_gradient(sigma, c.nu, c.nv, c.hu, c.hv, n / c.nv, n % c.nv, du, dv);
    const Eigen::Vector2d d(du, dv);
    lip = std::max(lip, std::sqrt(d.dot(c.nodes[n].ginv * d)));
  }
  return lip;
}

C0Bound c0_from_l2_validator(std::span<const double> sigma, double Lambda, const GeometryCache& c,
                             const CollapseReport& collapse) {
  if (sigma.size() != c.size()) throw Error(ErrorKind::ShapeMismatch, "section does not match grid");
  if (!(collapse.kappa > 0.0) || !(collapse.scale > 0.0))
    throw Error(ErrorKind::InvalidArgument, "collapse report needs kappa > 0 and a positive scale");
  C0Bound out;
  out.lipschitz = section_lipschitz(sigma, c);
  std::vector<double> sq(c.size());
  for (std::size_t n = 0; n < c.size(); ++n) {
    out.max_observed = std::max(out.max_observed, std::abs(sigma[n]));
    sq[n] = sigma[n] * sigma[n];
  }
  if (Lambda < out.lipschitz * (1.0 - 1e-12))
    throw Error(ErrorKind::LipschitzViolated,
                "Lambda " + std::to_string(Lambda) + " below measured max |grad sigma| " + std::to_string(out.lipschitz));
  out.epsilon = surface_integral(sq, c);
  const double r2 = collapse.scale * collapse.scale;
  if (out.epsilon > r2 * r2)
    throw Error(ErrorKind::EpsilonTooLarge, "int sigma^2 = " + std::to_string(out.epsilon) + " exceeds r^4");
  out.bound = (Lambda + 1.0 / std::sqrt(collapse.kappa)) * std::pow(out.epsilon, 0.25);
  out.holds = out.max_observed <= out.bound;
  return out;
}

}  // namespace hlmcf
