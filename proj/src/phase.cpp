#include "hlmcf/phase.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "hlmcf/error.hpp"
#include "hlmcf/parallel.hpp"

namespace hlmcf {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double x) { return x - 2.0 * kPi * std::nearbyint(x / (2.0 * kPi)); }

// Coordinate coefficients of the g-orthonormal tangent pair: e_k = E(k, p) d_p,
// e1 along d_u.
Mat2 tangent_coefficients(const NodeGeometry& ng) {
  const double guu = ng.g(0, 0);
  const double s = std::sqrt(ng.g.determinant() / guu);
  Mat2 E;
  E << 1.0 / std::sqrt(guu), 0.0, -ng.g(0, 1) / (guu * s), 1.0 / s;
  return E;
}

void check_sizes(const PhaseField& pf, const GeometryCache& cache) {
  if (pf.size() != cache.size()) throw Error(ErrorKind::ShapeMismatch, "phase field does not match grid");
}

// Everything expressed in the basis adapted to (Psi, Phi) at one node.
struct AdaptedNode {
  Vec3 a, b, c;
  Mat4 J, K;
  Vec4 e[4];
  Mat2 E;
  // dprime(k, d) = e_k-derivative of the d-th adapted coefficient
  Eigen::Matrix<double, 2, 3> dprime;
};

AdaptedNode adapt(const NodeGeometry& ng, const PhaseField& pf, std::size_t n, const hk::TwistorTriple& t) {
  AdaptedNode x;
  x.a = pf.a[n];
  x.b = orthogonal_phase(x.a);
  x.c = x.a.cross(x.b);
  x.J = hk::phase_operator(x.a, t);
  x.K = hk::phase_operator(x.b, t);
  x.e[0] = ng.e1;
  x.e[1] = x.J * ng.e1;
  x.e[2] = x.K * x.e[0];
  x.e[3] = x.K * x.e[1];
  x.E = tangent_coefficients(ng);
  for (int k = 0; k < 2; ++k) {
    const Vec3 da = x.E(k, 0) * pf.grad[n][0] + x.E(k, 1) * pf.grad[n][1];
    x.dprime(k, 0) = da.dot(x.a);
    x.dprime(k, 1) = da.dot(x.b);
    x.dprime(k, 2) = da.dot(x.c);
  }
  return x;
}

}  // namespace

PhaseField phase_field_from(std::vector<Vec3> a, const GeometryCache& cache) {
  if (a.size() != cache.size()) throw Error(ErrorKind::ShapeMismatch, "coefficient field does not match grid");
  PhaseField pf;
  for (Vec3& x : a) {
    const double n = x.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::NonFinite, "zero or non-finite phase coefficient");
    x /= n;
  }
  pf.a = std::move(a);
  pf.grad.resize(pf.a.size());
  pf.energy_density.resize(pf.a.size());
  const std::size_t nu = cache.nu, nv = cache.nv;
  std::span<const Vec3> av(pf.a);
  parallel_for(pf.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      Vec3 du, dv;
      central_gradient(av, nu, nv, cache.hu, cache.hv, n / nv, n % nv, du, dv);
      pf.grad[n] = {du, dv};
      const Mat2& gi = cache.nodes[n].ginv;
      pf.energy_density[n] = gi(0, 0) * du.squaredNorm() + 2.0 * gi(0, 1) * du.dot(dv) + gi(1, 1) * dv.squaredNorm();
    }
  });
  return pf;
}

PhaseField phase_field(const GeometryCache& cache, const hk::TwistorTriple& t) {
  std::vector<Vec3> a(cache.size());
  for (std::size_t n = 0; n < cache.size(); ++n) {
    const NodeGeometry& ng = cache.nodes[n];
    a[n] = hk::canonical_phase_from_frame(ng.e1, ng.e2, ng.e3, ng.e4, t).vec();
  }
  return phase_field_from(std::move(a), cache);
}

double twistor_energy(const PhaseField& pf, const GeometryCache& cache) {
  check_sizes(pf, cache);
  return surface_integral(pf.energy_density, cache);
}

std::vector<Vec3> tension_field(const PhaseField& pf, const GeometryCache& cache) {
  check_sizes(pf, cache);
  std::vector<Vec3> tau = laplace_beltrami(std::span<const Vec3>(pf.a), cache);
  for (std::size_t n = 0; n < tau.size(); ++n) tau[n] += pf.energy_density[n] * pf.a[n];
  return tau;
}

std::vector<double> kahler_angle(const PhaseField& pf, int axis) {
  const int r = hk::reference_axes(axis)[2];
  std::vector<double> out(pf.size());
  for (std::size_t n = 0; n < pf.size(); ++n) out[n] = std::acos(std::clamp(pf.a[n][r], -1.0, 1.0));
  return out;
}

LagrangianAngle lagrangian_angle(const PhaseField& pf, const GeometryCache& cache, int axis) {
  check_sizes(pf, cache);
  const auto [p, q, r] = hk::reference_axes(axis);
  double worst = 0.0;
  for (const Vec3& a : pf.a) worst = std::max(worst, std::abs(a[r]));
  if (!(worst < kLagrangianTolerance))
    throw Error(ErrorKind::NotLagrangian, "max |a_" + std::to_string(axis) + "| = " + std::to_string(worst));

  const std::size_t nu = cache.nu, nv = cache.nv, N = cache.size();
  std::vector<double> raw(N);
  for (std::size_t n = 0; n < N; ++n) raw[n] = std::atan2(pf.a[n][q], pf.a[n][p]);

  LagrangianAngle out;
  out.theta.resize(N);
  // Greedy row-major unwrap: first column along u, then each row along v.
  out.theta[0] = raw[0];
  for (std::size_t i = 1; i < nu; ++i)
    out.theta[i * nv] = out.theta[(i - 1) * nv] + wrap_angle(raw[i * nv] - raw[(i - 1) * nv]);
  for (std::size_t i = 0; i < nu; ++i)
    for (std::size_t j = 1; j < nv; ++j)
      out.theta[i * nv + j] = out.theta[i * nv + j - 1] + wrap_angle(raw[i * nv + j] - raw[i * nv + j - 1]);

  double loop_u = 0.0, loop_v = 0.0;
  for (std::size_t i = 0; i < nu; ++i) loop_u += wrap_angle(raw[((i + 1) % nu) * nv] - raw[i * nv]);
  for (std::size_t j = 0; j < nv; ++j) loop_v += wrap_angle(raw[(j + 1) % nv] - raw[j]);
  out.winding_u = std::lround(loop_u / (2.0 * kPi));
  out.winding_v = std::lround(loop_v / (2.0 * kPi));

  const Mat4& Jr = hk::standard_twistor_triple()[r + 1];
  std::vector<double> density(N);
  for (std::size_t i = 0; i < nu; ++i) {
    const std::size_t ip = (i + 1) % nu, im = (i + nu - 1) % nu;
    for (std::size_t j = 0; j < nv; ++j) {
      const std::size_t jp = (j + 1) % nv, jm = (j + nv - 1) % nv;
      const std::size_t n = i * nv + j;
      const NodeGeometry& ng = cache.nodes[n];
      const double dth_u = wrap_angle(raw[ip * nv + j] - raw[im * nv + j]) / (2.0 * cache.hu);
      const double dth_v = wrap_angle(raw[i * nv + jp] - raw[i * nv + jm]) / (2.0 * cache.hv);
      const Vec4 JH = Jr * ng.H;
      const Eigen::Vector2d res(JH.dot(ng.fu) + dth_u, JH.dot(ng.fv) + dth_v);
      density[n] = res.dot(ng.ginv * res);
    }
  }
  out.exactness_residual = std::sqrt(surface_integral(density, cache));
  return out;
}

Vec3 orthogonal_phase(const Vec3& a) {
  Vec3 b = Vec3::UnitZ().cross(a);
  if (b.norm() <= 0.1) b = Vec3::UnitX().cross(a);
  return b.normalized();
}

PlfResult plf_residual(const GeometryCache& cache, const PhaseField& pf, const hk::TwistorTriple& t) {
  check_sizes(pf, cache);
  using C = std::complex<double>;
  const C I(0.0, 1.0);
  PlfResult out;
  out.residual.resize(cache.size());
  out.magnitude.resize(cache.size());
  parallel_for(cache.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      const NodeGeometry& ng = cache.nodes[n];
      const AdaptedNode x = adapt(ng, pf, n, t);
      const hk::HolomorphicSymplecticForm omega = hk::holomorphic_symplectic(x.a, x.b, t);
      const C ih[2] = {omega(ng.H, x.e[0]), omega(ng.H, x.e[1])};
      // conjugate stereographic chart about the adapted pole
      const C dtheta[2] = {-I * x.dprime(0, 1) + x.dprime(0, 2), -I * x.dprime(1, 1) + x.dprime(1, 2)};
      // (1,0)-part with J e1 = e2, J e2 = -e1
      const C del[2] = {0.5 * (dtheta[0] - I * dtheta[1]), 0.5 * (dtheta[1] + I * dtheta[0])};
      const C r0 = ih[0] + 2.0 * I * del[0], r1 = ih[1] + 2.0 * I * del[1];
      out.residual[n] = std::sqrt(std::norm(r0) + std::norm(r1));
      const double lhs = std::sqrt(std::norm(ih[0]) + std::norm(ih[1]));
      const double rhs = 2.0 * std::sqrt(std::norm(del[0]) + std::norm(del[1]));
      out.magnitude[n] = std::max(lhs, rhs);
    }
  });
  return out;
}

BjaResult bja_identity(const GeometryCache& cache, const PhaseField& pf, const hk::TwistorTriple& t) {
  check_sizes(pf, cache);
  BjaResult out;
  out.lhs.resize(cache.size());
  out.rhs.resize(cache.size());
  for (std::size_t n = 0; n < cache.size(); ++n) {
    const NodeGeometry& ng = cache.nodes[n];
    const AdaptedNode x = adapt(ng, pf, n, t);
    const Vec4* fpq[2][2] = {{&ng.fuu, &ng.fuv}, {&ng.fuv, &ng.fvv}};
    // h[alpha][k][l] = g(e_k, D_l e_alpha) = -<A(e_k, e_l), e_alpha>
    double h[2][2][2];
    for (int al = 0; al < 2; ++al)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          double s = 0.0;
          for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q) s += x.E(k, p) * x.E(l, q) * fpq[p][q]->dot(x.e[2 + al]);
          h[al][k][l] = -s;
        }
    double rhs = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double s1 = h[0][1][i] - h[1][0][i];
      const double s2 = h[0][0][i] + h[1][1][i];
      rhs += s1 * s1 + s2 * s2;
    }
    out.lhs[n] = 4.0 * pf.energy_density[n];
    out.rhs[n] = 4.0 * rhs;
    if (ng.norm_A_sq > 1e-20)
      out.max_ratio = std::max(out.max_ratio, std::sqrt(pf.energy_density[n] / ng.norm_A_sq));
  }
  return out;
}

std::vector<double> polar_identity_check(const PhaseField& pf, const GeometryCache& cache, int axis) {
  check_sizes(pf, cache);
  const auto [p, q, r] = hk::reference_axes(axis);
  double closest = 1.0;
  for (const Vec3& a : pf.a) closest = std::min(closest, 1.0 - std::abs(a[r]));
  if (!(closest > kPoleMargin))
    throw Error(ErrorKind::PoleProximity, "min(1 - |a_" + std::to_string(axis) + "|) = " + std::to_string(closest));

  const std::size_t nu = cache.nu, nv = cache.nv, N = cache.size();
  std::vector<double> theta(N), phi(N);
  for (std::size_t n = 0; n < N; ++n) {
    theta[n] = std::atan2(pf.a[n][q], pf.a[n][p]);
    phi[n] = std::acos(std::clamp(pf.a[n][r], -1.0, 1.0));
  }
  std::vector<double> out(N);
  for (std::size_t i = 0; i < nu; ++i) {
    const std::size_t ip = (i + 1) % nu, im = (i + nu - 1) % nu;
    for (std::size_t j = 0; j < nv; ++j) {
      const std::size_t jp = (j + 1) % nv, jm = (j + nv - 1) % nv;
      const std::size_t n = i * nv + j;
      const Eigen::Vector2d dth(wrap_angle(theta[ip * nv + j] - theta[im * nv + j]) / (2.0 * cache.hu),
                                wrap_angle(theta[i * nv + jp] - theta[i * nv + jm]) / (2.0 * cache.hv));
      const Eigen::Vector2d dph((phi[ip * nv + j] - phi[im * nv + j]) / (2.0 * cache.hu),
                                (phi[i * nv + jp] - phi[i * nv + jm]) / (2.0 * cache.hv));
      const Mat2& gi = cache.nodes[n].ginv;
      const double s = std::sin(phi[n]);
      const double polar = s * s * dth.dot(gi * dth) + dph.dot(gi * dph);
      out[n] = std::abs(pf.energy_density[n] - polar);
    }
  }
  return out;
}

std::vector<double> hyper_lagrangian_residual(const GeometryCache& cache, const PhaseField& pf,
                                              const hk::TwistorTriple& t) {
  check_sizes(pf, cache);
  std::vector<double> out(cache.size());
  for (std::size_t n = 0; n < cache.size(); ++n) {
    const NodeGeometry& ng = cache.nodes[n];
    const hk::HolomorphicSymplecticForm omega = hk::holomorphic_symplectic(pf.a[n], orthogonal_phase(pf.a[n]), t);
    const std::complex<double> v = omega(ng.e1, ng.e2);
    out[n] = std::max(std::abs(v.real()), std::abs(v.imag()));
  }
  return out;
}

std::vector<double> hdp_margin(const GeometryCache& cache, const PhaseField& pf) {
  check_sizes(pf, cache);
  std::vector<double> out(cache.size());
  for (std::size_t n = 0; n < cache.size(); ++n) out[n] = 2.0 * pf.energy_density[n] - cache.nodes[n].norm_H_sq;
  return out;
}

double hdp_slack(const GeometryCache& cache, const PhaseField& pf) {
  check_sizes(pf, cache);
  const double h = std::max(cache.hu, cache.hv);
  double scale = 0.0;
  for (std::size_t n = 0; n < cache.size(); ++n)
    scale = std::max(scale, cache.nodes[n].norm_A_sq + pf.energy_density[n]);
  return 10.0 * h * h * scale;
}

Vec3 mean_direction(const PhaseField& pf, const GeometryCache& cache) {
  check_sizes(pf, cache);
  Vec3 m = Vec3::Zero();
  for (std::size_t n = 0; n < pf.size(); ++n) m += cache.nodes[n].sqrt_det_g * pf.a[n];
  const double len = m.norm();
  if (!(len > 0.0)) throw Error(ErrorKind::NonFinite, "phase field has no mean direction");
  return m / len;
}

double phase_spread(const PhaseField& pf, const GeometryCache& cache) {
  const Vec3 m = mean_direction(pf, cache);
  double worst = 0.0;
  for (const Vec3& a : pf.a) worst = std::max(worst, std::atan2(a.cross(m).norm(), a.dot(m)));
  return worst;
}

}  // namespace hlmcf
