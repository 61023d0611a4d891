#include "hlmcf/hk_kernel.hpp"

#include <cmath>
#include <sstream>

#include "hlmcf/error.hpp"

namespace hlmcf::hk {

const Mat4& TwistorTriple::operator[](int d) const {
  switch (d) {
    case 1: return j1;
    case 2: return j2;
    case 3: return j3;
  }
  throw Error(ErrorKind::InvalidArgument, "twistor index must be 1, 2 or 3");
}

TwistorTriple standard_twistor_triple() {
  TwistorTriple t;
  // J1 x = (x1, -x0, -x3, x2)
  t.j1 << 0, 1, 0, 0,
         -1, 0, 0, 0,
          0, 0, 0, -1,
          0, 0, 1, 0;
  // J2 x = (x2, x3, -x0, -x1)
  t.j2 << 0, 0, 1, 0,
          0, 0, 0, 1,
         -1, 0, 0, 0,
          0, -1, 0, 0;
  // J3 x = (x3, -x2, x1, -x0)
  t.j3 << 0, 0, 0, 1,
          0, 0, -1, 0,
          0, 1, 0, 0,
         -1, 0, 0, 0;
  return t;
}

TwistorCoefficient TwistorCoefficient::checked(const Vec3& a) {
  const double n = a.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kInputTolerance) {
    std::ostringstream os;
    os << "|a| = " << n;
    throw Error(ErrorKind::NotUnit, os.str());
  }
  return TwistorCoefficient(a / n);
}

TwistorCoefficient TwistorCoefficient::normalized(const Vec3& a) {
  const double n = a.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::NotUnit, "cannot normalize zero vector");
  return TwistorCoefficient(a / n);
}

Vec4 AmbientSpace::displacement(const Vec4& to, const Vec4& from) const {
  Vec4 d = to - from;
  if (periods) {
    for (int c = 0; c < 4; ++c) {
      const double p = (*periods)[c];
      d[c] -= p * std::nearbyint(d[c] / p);
    }
  }
  return d;
}

Vec4 AmbientSpace::reduce(const Vec4& x) const {
  if (!periods) return x;
  Vec4 r = x;
  for (int c = 0; c < 4; ++c) {
    const double p = (*periods)[c];
    r[c] -= p * std::floor(r[c] / p);
    if (r[c] >= p) r[c] -= p;  // floor rounding at the upper edge
  }
  return r;
}

Mat4 phase_operator(const Vec3& a, const TwistorTriple& t) {
  return phase_operator(TwistorCoefficient::checked(a), t);
}

Mat4 phase_operator(const TwistorCoefficient& a, const TwistorTriple& t) {
  return a[1] * t.j1 + a[2] * t.j2 + a[3] * t.j3;
}

double symplectic_form(const Mat4& J, const Vec4& u, const Vec4& v) { return (J * u).dot(v); }

HolomorphicSymplecticForm holomorphic_symplectic(const Vec3& a, const Vec3& b,
                                                 const TwistorTriple& t) {
  const Mat4 J = phase_operator(a, t);
  const Mat4 K = phase_operator(b, t);
  if (std::abs(a.dot(b)) > kInputTolerance) {
    std::ostringstream os;
    os << "a.b = " << a.dot(b);
    throw Error(ErrorKind::NotOrthogonal, os.str());
  }
  HolomorphicSymplecticForm form;
  form.real_part = (J * K).transpose();
  form.imag_part = -K.transpose();
  return form;
}

TwistorCoefficient canonical_phase_from_frame(const Vec4& e1, const Vec4& e2, const Vec4& e3,
                                              const Vec4& e4, const TwistorTriple& t) {
  Mat4 E;
  E.col(0) = e1;
  E.col(1) = e2;
  E.col(2) = e3;
  E.col(3) = e4;
  const double gram_err = (E.transpose() * E - Mat4::Identity()).cwiseAbs().maxCoeff();
  if (!(gram_err <= kFrameTolerance)) {
    std::ostringstream os;
    os << "max |Gram - Id| = " << gram_err;
    throw Error(ErrorKind::FrameNotOrthonormal, os.str());
  }
  if (!(E.determinant() > 0.0)) throw Error(ErrorKind::OrientationNegative, "det(e1 e2 e3 e4) <= 0");

  const Vec3 raw((t.j1 * e1).dot(e2), (t.j2 * e1).dot(e2), (t.j3 * e1).dot(e2));
  const TwistorCoefficient a = TwistorCoefficient::normalized(raw);
  const Mat4 J = phase_operator(a, t);
  const double residual = (J * e1 - e2).norm() + (J * e3 + e4).norm();
  if (!(residual <= kVerificationTolerance)) {
    std::ostringstream os;
    os << "defining-relation residual " << residual;
    throw Error(ErrorKind::VerificationFailed, os.str());
  }
  return a;
}

std::array<int, 3> reference_axes(int axis) {
  switch (axis) {
    case 3: return {0, 1, 2};
    case 1: return {1, 2, 0};
    case 2: return {2, 0, 1};
  }
  throw Error(ErrorKind::InvalidArgument, "reference axis must be 1, 2 or 3");
}

}  // namespace hlmcf::hk
