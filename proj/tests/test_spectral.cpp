#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "hlmcf/error.hpp"
#include "hlmcf/spectral.hpp"

using namespace hlmcf;

namespace {

constexpr double kPi = std::numbers::pi;

GeometryCache geometry(const std::string& name, std::size_t n = 64, double Lu = 2 * kPi, double Lv = 2 * kPi) {
  ScenarioSpec s;
  s.name = name;
  s.nu = s.nv = n;
  s.Lu = Lu;
  s.Lv = Lv;
  return compute_geometry(build_immersion(s));
}

}  // namespace

TEST_CASE("first eigenvalue against Fourier spectra") {
  const SpectralResult flat = lambda1(geometry("flat-plane-torus"));
  CHECK(std::abs(flat.lambda1 - 1.0) <= 1e-3);
  // the compact stencil's symbol for sin u at 64 nodes
  const double h = 2 * kPi / 64;
  CHECK(flat.lambda1 == doctest::Approx(std::pow(2 * std::sin(h / 2) / h, 2)).epsilon(1e-9));
  CHECK(flat.residual <= 1e-7);

  CHECK(std::abs(lambda1(geometry("clifford")).lambda1 - 1.0) <= 1e-3);
  CHECK(std::abs(lambda1(geometry("flat-plane-torus", 64, 2 * kPi, 4 * kPi)).lambda1 - 0.25) <= 1e-3);
}

TEST_CASE("first eigenvalue converges at second order") {
  const double e64 = std::abs(lambda1(geometry("flat-plane-torus")).lambda1 - 1.0);
  const double e128 = std::abs(lambda1(geometry("flat-plane-torus", 128)).lambda1 - 1.0);
  CHECK(std::log2(e64 / e128) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("eigenvalue scales inversely with the metric") {
  const double base = lambda1(geometry("flat-plane-torus", 32)).lambda1;
  for (double c : {0.5, 3.0}) {
    const double scaled = lambda1(geometry("flat-plane-torus", 32, 2 * kPi * c, 2 * kPi * c)).lambda1;
    CHECK(std::abs(scaled * c * c - base) <= 1e-10 * base);
  }
}

TEST_CASE("eigenfunction is normalized, mean zero and an eigenvector") {
  const GeometryCache c = geometry("perturbed-complex-torus", 32);
  const SpectralResult r = lambda1(c);
  std::vector<double> sq(c.size());
  for (std::size_t n = 0; n < c.size(); ++n) sq[n] = r.eigenfunction[n] * r.eigenfunction[n];
  CHECK(surface_integral(sq, c) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(surface_integral(r.eigenfunction, c)) <= 1e-10);
  const auto lf = laplace_beltrami(r.eigenfunction, c);
  for (std::size_t n = 0; n < c.size(); ++n) sq[n] = std::pow(lf[n] + r.lambda1 * r.eigenfunction[n], 2);
  CHECK(std::sqrt(surface_integral(sq, c)) == doctest::Approx(r.residual).epsilon(1e-3).scale(1e-9));
  CHECK(r.lambda2 >= r.lambda1);
  for (std::size_t k = 1; k < r.ritz_values.size(); ++k) CHECK(r.ritz_values[k] >= r.ritz_values[k - 1]);
}

TEST_CASE("warm start reproduces the eigenvalue") {
  const GeometryCache c = geometry("perturbed-complex-torus", 32);
  Eigen::MatrixXd warm;
  const SpectralResult cold = lambda1(c, {}, &warm);
  CHECK(warm.rows() == static_cast<Eigen::Index>(c.size()));
  const SpectralResult hot = lambda1(c, {}, &warm);
  CHECK(hot.lambda1 == doctest::Approx(cold.lambda1).epsilon(1e-10));
  CHECK(hot.iterations <= cold.iterations);
}

TEST_CASE("iteration cap raises no-convergence") {
  SpectralOptions opt;
  opt.max_iterations = 1;
  opt.residual_target = 0.0;
  CHECK_THROWS_AS(lambda1(geometry("perturbed-complex-torus", 16), opt), Error);
}

TEST_CASE("geodesic balls on the flat torus") {
  const GeometryCache c = geometry("flat-plane-torus");
  const auto d = geodesic_distances(c, 0);
  CHECK(d[0] == 0.0);
  CHECK(d[c.nv * 0 + 1] == doctest::Approx(c.hv));
  CHECK(d[c.nv * 1 + 2] == doctest::Approx(std::hypot(c.hu, 2 * c.hv)));
  CHECK(diameter_proxy(c) == doctest::Approx(kPi));

  const std::vector<std::size_t> centers = default_centers(c);
  CHECK(centers.size() == 16);
  const double radii[] = {0.1, 0.5};
  const CollapseReport r = geodesic_ball_volumes(c, centers, radii);
  for (const BallSample& s : r.samples) {
    if (s.radius == 0.5) CHECK(s.volume == doctest::Approx(kPi * 0.25).epsilon(0.08));
    if (s.radius == 0.1) CHECK(s.ratio == doctest::Approx(kPi).epsilon(0.10));
  }
  CHECK(r.scale == 0.5);
  CHECK(r.kappa > 0.0);
  const double too_big[] = {2.0};
  CHECK_THROWS_AS(geodesic_ball_volumes(c, centers, too_big), Error);
}

TEST_CASE("small balls are Euclidean on curved scenarios") {
  for (const char* name : {"clifford", "perturbed-complex-torus", "lagrangian-graph"}) {
    CAPTURE(name);
    const GeometryCache c = geometry(name);
    const double radii[] = {0.1};
    for (const BallSample& s : geodesic_ball_volumes(c, default_centers(c), radii).samples)
      CHECK(s.ratio == doctest::Approx(kPi).epsilon(0.10));
  }
}

TEST_CASE("C0 from L2 validator") {
  const GeometryCache c = geometry("flat-plane-torus");
  const double radii[] = {0.1, 0.25, 0.5};
  const CollapseReport rep = geodesic_ball_volumes(c, default_centers(c), radii);

  const std::vector<double> zero(c.size(), 0.0);
  const C0Bound z = c0_from_l2_validator(zero, 0.0, c, rep);
  CHECK(z.holds);
  CHECK(z.bound == 0.0);

  // sigma = delta sin u: eps = 2 pi^2 delta^2, the precondition caps delta near 0.056
  int tested = 0;
  for (double delta : {1e-4, 1e-3, 1e-2, 5e-2, 1e-1}) {
    std::vector<double> s(c.size());
    for (std::size_t n = 0; n < c.size(); ++n) s[n] = delta * std::sin(c.hu * double(n / c.nv));
    const double lip = section_lipschitz(s, c);
    CHECK(lip <= delta);
    if (2 * kPi * kPi * delta * delta > std::pow(rep.scale, 4)) {
      CHECK_THROWS_AS(c0_from_l2_validator(s, delta, c, rep), Error);
      continue;
    }
    const C0Bound b = c0_from_l2_validator(s, delta, c, rep);
    CHECK(b.epsilon == doctest::Approx(2 * kPi * kPi * delta * delta).epsilon(1e-10));
    CHECK(b.holds);
    CHECK(b.bound >= delta * (1 - 1e-12));
    ++tested;
  }
  CHECK(tested == 4);

  std::vector<double> s(c.size());
  for (std::size_t n = 0; n < c.size(); ++n) s[n] = 0.01 * std::sin(c.hu * double(n / c.nv));
  try {
    c0_from_l2_validator(s, 0.5 * section_lipschitz(s, c), c, rep);
    FAIL("expected lipschitz-violated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LipschitzViolated);
  }
}

TEST_CASE("C0 from L2 holds on random bandlimited sections") {
  const GeometryCache c = geometry("perturbed-complex-torus");
  const double radii[] = {0.1, 0.25, 0.5};
  const CollapseReport rep = geodesic_ball_volumes(c, default_centers(c), radii);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(1e-4, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(c.size(), 0.0);
    for (int p = -4; p <= 4; ++p)
      for (int q = -4; q <= 4; ++q) {
        if (std::abs(p) + std::abs(q) > 4) continue;
        const double a = g(rng), b = g(rng);
        for (std::size_t n = 0; n < c.size(); ++n) {
          const double x = p * c.hu * double(n / c.nv) + q * c.hv * double(n % c.nv);
          s[n] += a * std::cos(x) + b * std::sin(x);
        }
      }
    std::vector<double> sq(c.size());
    for (std::size_t n = 0; n < c.size(); ++n) sq[n] = s[n] * s[n];
    const double k = std::sqrt(scale(rng) * std::pow(rep.scale, 4) / surface_integral(sq, c));
    for (double& x : s) x *= k;
    CHECK(c0_from_l2_validator(s, section_lipschitz(s, c), c, rep).holds);
  }
}
