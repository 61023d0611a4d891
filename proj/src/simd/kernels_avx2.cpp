#include "hlmcf/error.hpp"
#include "hlmcf/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define HLMCF_HAVE_AVX2_TARGET 1
#define HLMCF_AVX2 __attribute__((target("avx2")))
#else
#define HLMCF_HAVE_AVX2_TARGET 0
#endif

namespace hlmcf::simd::avx2 {

#if HLMCF_HAVE_AVX2_TARGET

HLMCF_AVX2 void stencil_apply(const Stencil9& s, std::span<const double> x, std::span<double> y) {
  if (x.size() != s.size() || y.size() != s.size())
    throw Error(ErrorKind::ShapeMismatch, "stencil operand size");
  const std::size_t nu = s.nu, nv = s.nv;
  const double* xp = x.data();
  double* yp = y.data();
  const double* wc = s.w[Stencil9::C].data();
  const double* we = s.w[Stencil9::E].data();
  const double* ww = s.w[Stencil9::W].data();
  const double* wn = s.w[Stencil9::N].data();
  const double* ws = s.w[Stencil9::S].data();
  const double* wne = s.w[Stencil9::NE].data();
  const double* wnw = s.w[Stencil9::NW].data();
  const double* wse = s.w[Stencil9::SE].data();
  const double* wsw = s.w[Stencil9::SW].data();

  for (std::size_t i = 0; i < nu; ++i) {
    const std::size_t r = i * nv;
    const std::size_t rn = ((i + 1) % nu) * nv;
    const std::size_t rs = ((i + nu - 1) % nu) * nv;

    // Column 0 wraps to nv - 1.
    yp[r] = detail::stencil_node(s, xp, r, r, rn, rs, 0, 1 % nv, nv - 1);

    std::size_t j = 1;
    for (; j + 4 <= nv - 1; j += 4) {
      const std::size_t n = r + j;
      __m256d acc = _mm256_mul_pd(_mm256_loadu_pd(wc + n), _mm256_loadu_pd(xp + r + j));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(we + n), _mm256_loadu_pd(xp + r + j + 1)));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(ww + n), _mm256_loadu_pd(xp + r + j - 1)));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(wn + n), _mm256_loadu_pd(xp + rn + j)));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(ws + n), _mm256_loadu_pd(xp + rs + j)));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(wne + n), _mm256_loadu_pd(xp + rn + j + 1)));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(wnw + n), _mm256_loadu_pd(xp + rn + j - 1)));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(wse + n), _mm256_loadu_pd(xp + rs + j + 1)));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(wsw + n), _mm256_loadu_pd(xp + rs + j - 1)));
      _mm256_storeu_pd(yp + n, acc);
    }
    for (; j < nv; ++j) {
      const std::size_t jp = (j + 1) % nv;
      const std::size_t jm = (j + nv - 1) % nv;
      yp[r + j] = detail::stencil_node(s, xp, r + j, r, rn, rs, j, jp, jm);
    }
  }
}

HLMCF_AVX2 double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const std::size_t n4 = n & ~std::size_t{3};
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n4; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i)));
  double lane[4];
  _mm256_storeu_pd(lane, acc);
  for (std::size_t i = n4; i < n; ++i) lane[i & 3] = lane[i & 3] + x[i] * y[i];
  return detail::combine_lanes(lane);
}

HLMCF_AVX2 void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const std::size_t n4 = n & ~std::size_t{3};
  const __m256d va = _mm256_set1_pd(alpha);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y.data() + i);
    _mm256_storeu_pd(y.data() + i, _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x.data() + i))));
  }
  for (std::size_t i = n4; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

HLMCF_AVX2 void xpby(std::span<const double> x, double beta, std::span<double> y) {
  const std::size_t n = x.size();
  const std::size_t n4 = n & ~std::size_t{3};
  const __m256d vb = _mm256_set1_pd(beta);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y.data() + i);
    _mm256_storeu_pd(y.data() + i, _mm256_add_pd(_mm256_loadu_pd(x.data() + i), _mm256_mul_pd(vb, vy)));
  }
  for (std::size_t i = n4; i < n; ++i) y[i] = x[i] + beta * y[i];
}

HLMCF_AVX2 void multiply(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  const std::size_t n = x.size();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4)
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i)));
  for (std::size_t i = n4; i < n; ++i) out[i] = x[i] * y[i];
}

#else

void stencil_apply(const Stencil9& s, std::span<const double> x, std::span<double> y) { scalar::stencil_apply(s, x, y); }
double dot(std::span<const double> x, std::span<const double> y) { return scalar::dot(x, y); }
void axpy(double alpha, std::span<const double> x, std::span<double> y) { scalar::axpy(alpha, x, y); }
void xpby(std::span<const double> x, double beta, std::span<double> y) { scalar::xpby(x, beta, y); }
void multiply(std::span<const double> x, std::span<const double> y, std::span<double> out) { scalar::multiply(x, y, out); }

#endif

}  // namespace hlmcf::simd::avx2
