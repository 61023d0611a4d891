#include "hlmcf/surface.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "hlmcf/error.hpp"
#include "hlmcf/expression.hpp"
#include "hlmcf/parallel.hpp"

namespace hlmcf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSeedCollapse = 1e-8;

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw Error(ErrorKind::DegenerateParameters, std::string(name) + " must be positive");
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "flat-plane-torus", "clifford", "clifford-j3", "perturbed-complex-torus",
      "lagrangian-graph", "custom-expression"};
  return names;
}

double SurfaceGrid::hu() const { return kTwoPi / static_cast<double>(nu); }
double SurfaceGrid::hv() const { return kTwoPi / static_cast<double>(nv); }

SurfaceGrid build_immersion(const ScenarioSpec& sc) {
  if (sc.nu < 4 || sc.nv < 4) throw Error(ErrorKind::InvalidArgument, "nu and nv must be at least 4");

  SurfaceGrid s;
  s.nu = sc.nu;
  s.nv = sc.nv;
  const Vec4 standard_periods = Vec4::Constant(kTwoPi);

  std::function<Vec4(double, double)> F;
  const std::string& name = sc.name;
  if (name == "flat-plane-torus") {
    require_positive(sc.Lu, "Lu");
    require_positive(sc.Lv, "Lv");
    const double su = sc.Lu / kTwoPi, sv = sc.Lv / kTwoPi;
    F = [=](double u, double v) { return Vec4(su * u, sv * v, 0.0, 0.0); };
    s.ambient.periods = Vec4(sc.Lu, sc.Lv, kTwoPi, kTwoPi);
  } else if (name == "clifford" || name == "clifford-j3") {
    require_positive(sc.R, "R");
    require_positive(sc.r, "r");
    const double R = sc.R, r = sc.r;
    if (name == "clifford")
      F = [=](double u, double v) { return Vec4(R * std::cos(u), R * std::sin(u), r * std::cos(v), r * std::sin(v)); };
    else
      F = [=](double u, double v) { return Vec4(R * std::cos(u), r * std::cos(v), r * std::sin(v), R * std::sin(u)); };
  } else if (name == "perturbed-complex-torus") {
    require_positive(sc.eps, "eps");
    const double e = sc.eps;
    F = [=](double u, double v) { return Vec4(u, v, e * std::sin(u), e * std::sin(v)); };
    s.ambient.periods = standard_periods;
  } else if (name == "lagrangian-graph") {
    require_positive(sc.eps, "eps");
    const double e = sc.eps;
    F = [=](double u, double v) {
      return Vec4(u, v, e * std::sin(u) * std::cos(v), -e * std::cos(u) * std::sin(v));
    };
    s.ambient.periods = standard_periods;
  } else if (name == "custom-expression") {
    std::array<Expression, 4> ex = {Expression(sc.expr[0]), Expression(sc.expr[1]), Expression(sc.expr[2]),
                                    Expression(sc.expr[3])};
    F = [ex](double u, double v) { return Vec4(ex[0](u, v), ex[1](u, v), ex[2](u, v), ex[3](u, v)); };
    if (sc.periods) {
      for (int c = 0; c < 4; ++c) require_positive((*sc.periods)[c], "period");
      s.ambient.periods = sc.periods;
    }
  } else {
    throw Error(ErrorKind::UnknownScenario, "unknown scenario '" + name + "'");
  }

  s.positions.resize(s.size());
  const double hu = s.hu(), hv = s.hv();
  for (std::size_t i = 0; i < s.nu; ++i)
    for (std::size_t j = 0; j < s.nv; ++j) {
      const Vec4 x = F(hu * static_cast<double>(i), hv * static_cast<double>(j));
      if (!x.allFinite()) throw Error(ErrorKind::NonFinite, "scenario produced a non-finite position");
      s.positions[s.index(i, j)] = s.ambient.reduce(x);
    }
  return s;
}

namespace {

// Orthonormal normal pair by classical Gram-Schmidt with reorthogonalization.
bool orthonormalize_against(Vec4& x, std::span<const Vec4> basis) {
  const double start = x.norm();
  for (int pass = 0; pass < 2; ++pass)
    for (const Vec4& b : basis) x -= b.dot(x) * b;
  const double n = x.norm();
  if (!(n > kSeedCollapse * std::max(start, 1.0))) return false;
  x /= n;
  return true;
}

void normal_frame(NodeGeometry& ng) {
  static const std::array<Vec4, 4> seeds = {Vec4(0, 0, 1, 0), Vec4(0, 0, 0, 1), Vec4(1, 0, 0, 0),
                                            Vec4(0, 1, 0, 0)};
  std::array<Vec4, 4> basis = {ng.e1, ng.e2, Vec4::Zero(), Vec4::Zero()};
  std::size_t found = 2;
  for (const Vec4& seed : seeds) {
    Vec4 x = seed;
    if (orthonormalize_against(x, std::span<const Vec4>(basis.data(), found))) basis[found++] = x;
    if (found == 4) break;
  }
  if (found < 4) throw Error(ErrorKind::NormalSeedCollapse, "no admissible normal seed pair");
  ng.e3 = basis[2];
  ng.e4 = basis[3];
  Mat4 frame;
  frame << ng.e1, ng.e2, ng.e3, ng.e4;
  if (frame.determinant() < 0.0) ng.e4 = -ng.e4;
}

}  // namespace

GeometryCache compute_geometry(const SurfaceGrid& s, std::optional<double> reference_mean_det) {
  if (s.positions.size() != s.size() || s.nu < 3 || s.nv < 3)
    throw Error(ErrorKind::ShapeMismatch, "grid positions do not match nu x nv");
  for (const Vec4& x : s.positions)
    if (!x.allFinite()) throw Error(ErrorKind::NonFinite, "non-finite position");

  GeometryCache c;
  c.nu = s.nu;
  c.nv = s.nv;
  c.hu = s.hu();
  c.hv = s.hv();
  c.nodes.resize(s.size());
  const std::size_t nu = s.nu, nv = s.nv;
  const double hu = c.hu, hv = c.hv;

  auto step = [&](std::size_t a, std::size_t b) { return s.ambient.displacement(s.positions[a], s.positions[b]); };

  parallel_for(s.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      const std::size_t i = n / nv, j = n % nv;
      const std::size_t ip = (i + 1) % nu, im = (i + nu - 1) % nu;
      const std::size_t jp = (j + 1) % nv, jm = (j + nv - 1) % nv;
      auto at = [nv](std::size_t a, std::size_t b) { return a * nv + b; };

      NodeGeometry& ng = c.nodes[n];
      const Vec4 du_p = step(at(ip, j), n), du_m = step(n, at(im, j));
      const Vec4 dv_p = step(at(i, jp), n), dv_m = step(n, at(i, jm));
      ng.fu = (du_p + du_m) / (2.0 * hu);
      ng.fv = (dv_p + dv_m) / (2.0 * hv);
      ng.fuu = (du_p - du_m) / (hu * hu);
      ng.fvv = (dv_p - dv_m) / (hv * hv);
      // f(i+1, j+1) - f(i+1, j-1) - f(i-1, j+1) + f(i-1, j-1), chained through short edges
      const Vec4 top = step(at(ip, jp), at(ip, j)) + step(at(ip, j), at(ip, jm));
      const Vec4 bottom = step(at(im, jp), at(im, j)) + step(at(im, j), at(im, jm));
      ng.fuv = (top - bottom) / (4.0 * hu * hv);

      // Diagonal entries average the squared forward and backward edges; the
      // cross term of the four edge pairs reduces to <f_u, f_v>.
      const double guu = 0.5 * (du_p.squaredNorm() + du_m.squaredNorm()) / (hu * hu);
      const double gvv = 0.5 * (dv_p.squaredNorm() + dv_m.squaredNorm()) / (hv * hv);
      const double guv = ng.fu.dot(ng.fv);
      ng.g << guu, guv, guv, gvv;
    }
  });

  double mean_det = 0.0;
  for (const NodeGeometry& ng : c.nodes) mean_det += ng.g.determinant();
  mean_det /= static_cast<double>(c.size());
  c.mean_det_g = mean_det;
  const double det_floor = kDetFloorFactor * reference_mean_det.value_or(mean_det);
  for (std::size_t n = 0; n < c.size(); ++n) {
    const double det = c.nodes[n].g.determinant();
    if (!(det > det_floor))
      throw Error(ErrorKind::MetricDegenerate, "det g = " + std::to_string(det) + " at node " + std::to_string(n));
  }

  parallel_for(s.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      NodeGeometry& ng = c.nodes[n];
      ng.ginv = ng.g.inverse();
      ng.sqrt_det_g = std::sqrt(ng.g.determinant());
      ng.e1 = ng.fu.normalized();
      ng.e2 = ng.fv - ng.e1.dot(ng.fv) * ng.e1;
      ng.e2 -= ng.e1.dot(ng.e2) * ng.e1;
      ng.e2.normalize();
      normal_frame(ng);

      const Vec4* fij[2][2] = {{&ng.fuu, &ng.fuv}, {&ng.fuv, &ng.fvv}};
      const Vec4* normals[2] = {&ng.e3, &ng.e4};
      for (int a = 0; a < 2; ++a)
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q) ng.h[a][p][q] = fij[p][q]->dot(*normals[a]);

      ng.H.setZero();
      ng.norm_A_sq = 0.0;
      for (int a = 0; a < 2; ++a) {
        double Ha = 0.0;
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q) {
            Ha += ng.ginv(p, q) * ng.h[a][p][q];
            for (int k = 0; k < 2; ++k)
              for (int l = 0; l < 2; ++l)
                ng.norm_A_sq += ng.ginv(p, k) * ng.ginv(q, l) * ng.h[a][p][q] * ng.h[a][k][l];
          }
        ng.H += Ha * *normals[a];
      }
      ng.norm_H_sq = ng.H.squaredNorm();
    }
  });

  // Flux-form operator: D f = d_i(sqrt(g) g^ij d_j f), symmetric by construction.
  simd::Stencil9& D = c.stiffness;
  D.nu = nu;
  D.nv = nv;
  for (auto& w : D.w) w.assign(c.size(), 0.0);
  c.inv_sqrt_det_g.resize(c.size());
  std::vector<double> cuu(c.size()), cuv(c.size()), cvv(c.size());
  for (std::size_t n = 0; n < c.size(); ++n) {
    const NodeGeometry& ng = c.nodes[n];
    cuu[n] = ng.sqrt_det_g * ng.ginv(0, 0);
    cuv[n] = ng.sqrt_det_g * ng.ginv(0, 1);
    cvv[n] = ng.sqrt_det_g * ng.ginv(1, 1);
    c.inv_sqrt_det_g[n] = 1.0 / ng.sqrt_det_g;
  }
  using T = simd::Stencil9;
  const double huu = hu * hu, hvv = hv * hv, cross = 4.0 * hu * hv;
  for (std::size_t i = 0; i < nu; ++i) {
    const std::size_t ip = (i + 1) % nu, im = (i + nu - 1) % nu;
    for (std::size_t j = 0; j < nv; ++j) {
      const std::size_t jp = (j + 1) % nv, jm = (j + nv - 1) % nv;
      const std::size_t n = i * nv + j;
      const std::size_t nN = ip * nv + j, nS = im * nv + j, nE = i * nv + jp, nW = i * nv + jm;
      D.w[T::N][n] = 0.5 * (cuu[n] + cuu[nN]) / huu;
      D.w[T::S][n] = 0.5 * (cuu[n] + cuu[nS]) / huu;
      D.w[T::E][n] = 0.5 * (cvv[n] + cvv[nE]) / hvv;
      D.w[T::W][n] = 0.5 * (cvv[n] + cvv[nW]) / hvv;
      D.w[T::NE][n] = (cuv[nN] + cuv[nE]) / cross;
      D.w[T::NW][n] = -(cuv[nN] + cuv[nW]) / cross;
      D.w[T::SE][n] = -(cuv[nS] + cuv[nE]) / cross;
      D.w[T::SW][n] = (cuv[nS] + cuv[nW]) / cross;
      double sum = 0.0;
      for (int t = T::E; t < T::kTaps; ++t) sum += D.w[t][n];
      D.w[T::C][n] = -sum;
    }
  }
  return c;
}

void laplace_beltrami(std::span<const double> field, const GeometryCache& cache, std::span<double> out) {
  if (field.size() != cache.size() || out.size() != cache.size())
    throw Error(ErrorKind::ShapeMismatch, "field size does not match grid");
  simd::stencil_apply(cache.stiffness, field, out);
  simd::multiply(out, cache.inv_sqrt_det_g, out);
}

std::vector<double> laplace_beltrami(std::span<const double> field, const GeometryCache& cache) {
  std::vector<double> out(cache.size());
  laplace_beltrami(field, cache, out);
  return out;
}

std::vector<Vec3> laplace_beltrami(std::span<const Vec3> field, const GeometryCache& cache) {
  if (field.size() != cache.size()) throw Error(ErrorKind::ShapeMismatch, "field size does not match grid");
  std::vector<Vec3> out(cache.size());
  std::vector<double> comp(cache.size()), lap(cache.size());
  for (int d = 0; d < 3; ++d) {
    for (std::size_t n = 0; n < comp.size(); ++n) comp[n] = field[n][d];
    laplace_beltrami(comp, cache, lap);
    for (std::size_t n = 0; n < comp.size(); ++n) out[n][d] = lap[n];
  }
  return out;
}

double surface_integral(std::span<const double> density, const GeometryCache& cache) {
  if (density.size() != cache.size()) throw Error(ErrorKind::ShapeMismatch, "density size does not match grid");
  double sum = 0.0;
  for (std::size_t n = 0; n < density.size(); ++n) sum += density[n] * cache.nodes[n].sqrt_det_g;
  return sum * cache.hu * cache.hv;
}

double area(const GeometryCache& cache) {
  double sum = 0.0;
  for (const NodeGeometry& ng : cache.nodes) sum += ng.sqrt_det_g;
  return sum * cache.hu * cache.hv;
}

std::vector<double> gauss_curvature_check(const GeometryCache& c) {
  const std::size_t N = c.size(), nu = c.nu, nv = c.nv;
  std::vector<double> E(N), F(N), G(N);
  for (std::size_t n = 0; n < N; ++n) {
    E[n] = c.nodes[n].g(0, 0);
    F[n] = c.nodes[n].g(0, 1);
    G[n] = c.nodes[n].g(1, 1);
  }
  const double hu = c.hu, hv = c.hv;
  std::vector<double> out(N);
  for (std::size_t i = 0; i < nu; ++i) {
    const std::size_t ip = (i + 1) % nu, im = (i + nu - 1) % nu;
    for (std::size_t j = 0; j < nv; ++j) {
      const std::size_t jp = (j + 1) % nv, jm = (j + nv - 1) % nv;
      const std::size_t n = i * nv + j;
      auto d_u = [&](const std::vector<double>& f) { return (f[ip * nv + j] - f[im * nv + j]) / (2 * hu); };
      auto d_v = [&](const std::vector<double>& f) { return (f[i * nv + jp] - f[i * nv + jm]) / (2 * hv); };
      auto d_uu = [&](const std::vector<double>& f) {
        return (f[ip * nv + j] - 2 * f[n] + f[im * nv + j]) / (hu * hu);
      };
      auto d_vv = [&](const std::vector<double>& f) {
        return (f[i * nv + jp] - 2 * f[n] + f[i * nv + jm]) / (hv * hv);
      };
      auto d_uv = [&](const std::vector<double>& f) {
        return (f[ip * nv + jp] - f[ip * nv + jm] - f[im * nv + jp] + f[im * nv + jm]) / (4 * hu * hv);
      };
      const double e = E[n], f = F[n], g = G[n];
      Eigen::Matrix3d M1, M2;
      M1 << -0.5 * d_vv(E) + d_uv(F) - 0.5 * d_uu(G), 0.5 * d_u(E), d_u(F) - 0.5 * d_v(E),
          d_v(F) - 0.5 * d_u(G), e, f,
          0.5 * d_v(G), f, g;
      M2 << 0.0, 0.5 * d_v(E), 0.5 * d_u(G),
          0.5 * d_v(E), e, f,
          0.5 * d_u(G), f, g;
      const double det = e * g - f * f;
      const double k_int = (M1.determinant() - M2.determinant()) / (det * det);

      const NodeGeometry& ng = c.nodes[n];
      double k_ext = 0.0;
      for (int a = 0; a < 2; ++a) k_ext += ng.h[a][0][0] * ng.h[a][1][1] - ng.h[a][0][1] * ng.h[a][0][1];
      k_ext /= det;
      out[n] = std::abs(k_int - k_ext);
    }
  }
  return out;
}

double min_edge_length(const SurfaceGrid& s) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.nu; ++i)
    for (std::size_t j = 0; j < s.nv; ++j) {
      const std::size_t n = s.index(i, j);
      const std::size_t ip = (i + 1) % s.nu, jp = (j + 1) % s.nv;
      for (std::size_t other : {s.index(ip, j), s.index(i, jp)})
        m = std::min(m, s.ambient.displacement(s.positions[other], s.positions[n]).norm());
    }
  return m;
}

}  // namespace hlmcf
