#include <cmath>
#include <numbers>

#include <doctest.h>

#include "hlmcf/error.hpp"
#include "hlmcf/phase.hpp"

using namespace hlmcf;

namespace {

constexpr double kPi = std::numbers::pi;
const hk::TwistorTriple kT = hk::standard_twistor_triple();

GeometryCache geometry(const std::string& name, std::size_t n = 64, double eps = 0.05) {
  ScenarioSpec s;
  s.name = name;
  s.nu = s.nv = n;
  s.eps = eps;
  return compute_geometry(build_immersion(s));
}

GeometryCache custom(std::array<std::string, 4> expr, std::size_t n) {
  ScenarioSpec s;
  s.name = "custom-expression";
  s.nu = s.nv = n;
  s.expr = std::move(expr);
  s.periods = Vec4::Constant(2.0 * kPi);
  return compute_geometry(build_immersion(s));
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

template <class F>
PhaseField field(const GeometryCache& c, F f) {
  std::vector<Vec3> a(c.size());
  for (std::size_t n = 0; n < c.size(); ++n) a[n] = f(c.hu * double(n / c.nv), c.hv * double(n % c.nv));
  return phase_field_from(std::move(a), c);
}

double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace

TEST_CASE("flat complex plane has constant phase") {
  const GeometryCache c = geometry("flat-plane-torus", 16);
  const PhaseField pf = phase_field(c, kT);
  for (std::size_t n = 0; n < c.size(); ++n) {
    CHECK(pf.a[n] == Vec3(-1, 0, 0));
    CHECK(pf.energy_density[n] == 0.0);
  }
  CHECK(twistor_energy(pf, c) <= 1e-12);
  CHECK(max_abs(hyper_lagrangian_residual(c, pf, kT)) <= 1e-12);
  CHECK(max_abs(plf_residual(c, pf, kT).residual) <= 1e-10);
  const BjaResult b = bja_identity(c, pf, kT);
  CHECK(max_abs(b.lhs) == 0.0);
  CHECK(max_abs(b.rhs) == 0.0);
  CHECK(phase_spread(pf, c) == 0.0);
}

TEST_CASE("phase deviation of the perturbed torus is first order in eps") {
  auto deviation = [](double eps) {
    const GeometryCache c = geometry("perturbed-complex-torus", 32, eps);
    const PhaseField pf = phase_field(c, kT);
    double d = 0.0;
    for (const Vec3& a : pf.a) d = std::max(d, (a - Vec3(-1, 0, 0)).norm());
    return d;
  };
  CHECK(deviation(0.02) / deviation(0.01) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("twistor energy is quadratic in eps") {
  auto energy = [](double eps) {
    const GeometryCache c = geometry("perturbed-complex-torus", 32, eps);
    return twistor_energy(phase_field(c, kT), c);
  };
  CHECK(energy(0.02) / energy(0.01) == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("clifford phase is Lagrangian for J1 and the rotated torus for J3") {
  const GeometryCache c = geometry("clifford");
  const PhaseField pf = phase_field(c, kT);
  for (std::size_t n = 0; n < c.size(); ++n) {
    const double u = c.hu * double(n / c.nv), v = c.hv * double(n % c.nv);
    CHECK(std::abs(pf.a[n][0]) <= 1e-10);
    CHECK((pf.a[n] - Vec3(0, -std::cos(u - v), std::sin(u - v))).norm() <= 1e-10);
  }
  for (double alpha : kahler_angle(pf, 1)) CHECK(alpha == doctest::Approx(kPi / 2).epsilon(1e-8));

  const GeometryCache c3 = geometry("clifford-j3");
  const PhaseField p3 = phase_field(c3, kT);
  for (const Vec3& a : p3.a) CHECK(std::abs(a[2]) <= 1e-10);
  for (double alpha : kahler_angle(p3)) CHECK(alpha == doctest::Approx(kPi / 2).epsilon(1e-8));
}

TEST_CASE("clifford twistor energy converges to 8 pi^2") {
  const double e64 = std::abs(twistor_energy(phase_field(geometry("clifford"), kT), geometry("clifford")) - 8 * kPi * kPi);
  const GeometryCache f = geometry("clifford", 128);
  const double e128 = std::abs(twistor_energy(phase_field(f, kT), f) - 8 * kPi * kPi);
  CHECK(e64 <= 1e-2 * 8 * kPi * kPi);
  CHECK(observed_order(e64, e128) > 1.8);
}

TEST_CASE("Kahler angle") {
  const GeometryCache c = geometry("flat-plane-torus", 4);
  std::vector<Vec3> a(c.size(), Vec3(0, 0, 1));
  a[1] = Vec3(1, 0, 0);
  const auto alpha = kahler_angle(phase_field_from(a, c));
  CHECK(alpha[0] == 0.0);
  CHECK(alpha[1] == doctest::Approx(kPi / 2));
}

TEST_CASE("tension field") {
  const GeometryCache c = geometry("flat-plane-torus");
  const PhaseField cst = field(c, [](double, double) { return Vec3(0.6, 0, 0.8); });
  for (const Vec3& t : tension_field(cst, c)) CHECK(t.norm() <= 1e-12);

  auto equator_error = [](std::size_t n) {
    const GeometryCache g = geometry("flat-plane-torus", n);
    double e = 0.0;
    for (const Vec3& t : tension_field(field(g, [](double u, double) { return Vec3(std::cos(u), std::sin(u), 0); }), g))
      e = std::max(e, t.norm());
    return e;
  };
  const double e64 = equator_error(64), e128 = equator_error(128);
  CHECK(e64 <= 5e-3);
  CHECK(observed_order(e64, e128) > 1.8);

  // <tau, a> integrates to O(h^2) for a smooth non-harmonic field
  auto normal_part = [](std::size_t n) {
    const GeometryCache g = geometry("perturbed-complex-torus", n, 0.1);
    const PhaseField pf = field(g, [](double u, double v) {
      return Vec3(std::cos(u) + 0.3 * std::sin(v), std::sin(u) * std::cos(v), 0.5 + 0.2 * std::cos(2 * v));
    });
    const auto tau = tension_field(pf, g);
    std::vector<double> d(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) d[k] = tau[k].dot(pf.a[k]);
    return std::abs(surface_integral(d, g)) / twistor_energy(pf, g);
  };
  const double n64 = normal_part(64), n128 = normal_part(128);
  CHECK(n64 <= 2e-2);
  CHECK(observed_order(n64, n128) > 1.8);
}

TEST_CASE("Lagrangian angle on a flat Lagrangian plane") {
  const GeometryCache c = custom({"u", "0", "v", "0"}, 32);
  const PhaseField pf = phase_field(c, kT);
  const LagrangianAngle la = lagrangian_angle(pf, c, 3);
  CHECK(la.exactness_residual < 1e-10);
  for (double th : la.theta) CHECK(th == doctest::Approx(la.theta[0]).epsilon(1e-12));
  CHECK(la.winding_u == 0);
  CHECK(la.winding_v == 0);
}

TEST_CASE("Lagrangian angle exactness converges on clifford tori") {
  const GeometryCache c64 = geometry("clifford"), c128 = geometry("clifford", 128);
  const LagrangianAngle a = lagrangian_angle(phase_field(c64, kT), c64, 1);
  const LagrangianAngle b = lagrangian_angle(phase_field(c128, kT), c128, 1);
  CHECK(observed_order(a.exactness_residual, b.exactness_residual) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::abs(a.winding_u) == 1);
  CHECK(std::abs(a.winding_v) == 1);

  const GeometryCache j64 = geometry("clifford-j3"), j128 = geometry("clifford-j3", 128);
  const double r64 = lagrangian_angle(phase_field(j64, kT), j64).exactness_residual;
  const double r128 = lagrangian_angle(phase_field(j128, kT), j128).exactness_residual;
  CHECK(observed_order(r64, r128) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("Lagrangian angle requires a Lagrangian input") {
  const GeometryCache c = geometry("perturbed-complex-torus", 16);
  const PhaseField pf = phase_field(c, kT);
  try {
    lagrangian_angle(pf, c, 1);
    FAIL("expected not-lagrangian");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotLagrangian);
  }
}

TEST_CASE("H-phase formula and frame identity converge at second order") {
  for (const char* name : {"clifford", "perturbed-complex-torus", "lagrangian-graph"}) {
    CAPTURE(name);
    const GeometryCache c64 = geometry(name), c128 = geometry(name, 128);
    const PhaseField p64 = phase_field(c64, kT), p128 = phase_field(c128, kT);
    const double r64 = max_abs(plf_residual(c64, p64, kT).residual);
    const double r128 = max_abs(plf_residual(c128, p128, kT).residual);
    CHECK(observed_order(r64, r128) > 1.8);
    auto gap = [](const BjaResult& b) {
      double g = 0.0;
      for (std::size_t n = 0; n < b.lhs.size(); ++n) g = std::max(g, std::abs(b.lhs[n] - b.rhs[n]));
      return g;
    };
    const BjaResult b64 = bja_identity(c64, p64, kT), b128 = bja_identity(c128, p128, kT);
    CHECK(observed_order(gap(b64), gap(b128)) > 1.8);
    CHECK(b64.max_ratio < 2.9);
    CHECK(max_abs(hyper_lagrangian_residual(c64, p64, kT)) <= 1e-8);
  }
}

TEST_CASE("polar identity") {
  auto chart_error = [](std::size_t n) {
    const GeometryCache g = geometry("flat-plane-torus", n);
    const double s = std::sin(1.0), k = std::cos(1.0);
    const PhaseField pf = field(g, [=](double u, double) { return Vec3(s * std::cos(u), s * std::sin(u), k); });
    double both = 0.0;
    for (double e : pf.energy_density) both = std::max(both, std::abs(e - s * s));
    return std::make_pair(max_abs(polar_identity_check(pf, g)), both);
  };
  const auto [r64, d64] = chart_error(64);
  const auto [r128, d128] = chart_error(128);
  CHECK(d64 <= 5e-3);
  CHECK(r64 <= 5e-3);
  CHECK(observed_order(r64, r128) > 1.8);

  const GeometryCache g = geometry("perturbed-complex-torus", 32);
  const PhaseField pf = phase_field(g, kT);
  CHECK_NOTHROW(polar_identity_check(pf, g, 2));
  CHECK_THROWS_AS(polar_identity_check(pf, g, 1), Error);
}

TEST_CASE("energy density bounds the mean curvature") {
  for (const char* name : {"clifford", "clifford-j3", "perturbed-complex-torus", "lagrangian-graph"}) {
    CAPTURE(name);
    for (std::size_t n : {32u, 64u}) {
      const GeometryCache c = geometry(name, n);
      const PhaseField pf = phase_field(c, kT);
      const auto m = hdp_margin(c, pf);
      CHECK(*std::min_element(m.begin(), m.end()) >= -hdp_slack(c, pf));
    }
  }
}

TEST_CASE("orthogonal phase and mean direction") {
  for (const Vec3& a : {Vec3(1, 0, 0), Vec3(0, 0, 1), Vec3(0.6, 0.0, 0.8), Vec3(0.0, 0.995, 0.0998749)}) {
    const Vec3 b = orthogonal_phase(a.normalized());
    CHECK(std::abs(b.dot(a)) <= 1e-14);
    CHECK(b.norm() == doctest::Approx(1.0));
  }
  const GeometryCache c = geometry("flat-plane-torus", 8);
  const PhaseField pf = field(c, [](double u, double) { return Vec3(std::cos(0.1 * std::sin(u)), std::sin(0.1 * std::sin(u)), 0); });
  CHECK((mean_direction(pf, c) - Vec3(1, 0, 0)).norm() <= 1e-12);
  CHECK(phase_spread(pf, c) == doctest::Approx(0.1 * std::sin(2 * kPi * 2 / 8)).epsilon(1e-9));
}
