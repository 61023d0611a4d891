#pragma once

// Quaternionic linear algebra of flat R^4 = H with ordered basis (1, i, j, k).

#include <array>
#include <complex>
#include <optional>

#include <Eigen/Dense>

namespace hlmcf {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

namespace hk {

inline constexpr double kInputTolerance = 1e-9;
inline constexpr double kSelfCheckTolerance = 1e-12;
inline constexpr double kFrameTolerance = 1e-8;
inline constexpr double kVerificationTolerance = 1e-6;

/// Three orthogonal anti-involutions of R^4 with J1 J2 = J3.
struct TwistorTriple {
  Mat4 j1, j2, j3;

  /// d in {1, 2, 3}.
  const Mat4& operator[](int d) const;
};

/// x -> x(-i), x -> x(-j), x -> x(-k). The plane span{1, i} is J1-complex.
TwistorTriple standard_twistor_triple();

/// Unit vector a in S^2; J_a = sum_d a_d J_d.
class TwistorCoefficient {
 public:
  /// Rejects |a| deviating from 1 by more than kInputTolerance, then renormalizes.
  static TwistorCoefficient checked(const Vec3& a);
  /// Projects any nonzero vector onto S^2.
  static TwistorCoefficient normalized(const Vec3& a);

  const Vec3& vec() const { return a_; }
  double operator[](int d) const { return a_[d - 1]; }

 private:
  explicit TwistorCoefficient(const Vec3& a) : a_(a) {}
  Vec3 a_;
};

/// Flat R^4, or the torus R^4 / (periods) when periods are set.
struct AmbientSpace {
  std::optional<Vec4> periods;

  /// to - from, reduced to the minimal image on the torus.
  Vec4 displacement(const Vec4& to, const Vec4& from) const;
  /// Coordinates reduced into [0, period).
  Vec4 reduce(const Vec4& x) const;
  bool is_torus() const { return periods.has_value(); }
};

/// Omega_J = omega_{JK} - i omega_K stored as bilinear-form matrices:
/// real_part(u, v) = u^T real_part v = g(JK u, v), imag_part(u, v) = -g(K u, v).
struct HolomorphicSymplecticForm {
  Mat4 real_part;
  Mat4 imag_part;

  std::complex<double> operator()(const Vec4& u, const Vec4& v) const {
    return {u.dot(real_part * v), u.dot(imag_part * v)};
  }
};

Mat4 phase_operator(const Vec3& a, const TwistorTriple& t);
Mat4 phase_operator(const TwistorCoefficient& a, const TwistorTriple& t);

/// g(J u, v).
double symplectic_form(const Mat4& J, const Vec4& u, const Vec4& v);

HolomorphicSymplecticForm holomorphic_symplectic(const Vec3& a, const Vec3& b,
                                                 const TwistorTriple& t);

/// The unique a with J_a e1 = e2 and J_a e3 = -e4 for a positively oriented
/// orthonormal frame (e1, e2 tangent; e3, e4 normal).
TwistorCoefficient canonical_phase_from_frame(const Vec4& e1, const Vec4& e2, const Vec4& e3,
                                              const Vec4& e4, const TwistorTriple& t);

/// Cyclic relabeling that makes J_axis play the role of J3: returns the
/// 0-based component indices (p, q, r) with (J_{p+1}, J_{q+1}, J_{r+1})
/// again satisfying the quaternion relations and r + 1 == axis.
std::array<int, 3> reference_axes(int axis);

}  // namespace hk
}  // namespace hlmcf
