#include "hlmcf/error.hpp"
#include "hlmcf/simd/kernels.hpp"

namespace hlmcf::simd::scalar {

void stencil_apply(const Stencil9& s, std::span<const double> x, std::span<double> y) {
  if (x.size() != s.size() || y.size() != s.size())
    throw Error(ErrorKind::ShapeMismatch, "stencil operand size");
  const std::size_t nu = s.nu, nv = s.nv;
  for (std::size_t i = 0; i < nu; ++i) {
    const std::size_t r = i * nv;
    const std::size_t rn = ((i + 1) % nu) * nv;
    const std::size_t rs = ((i + nu - 1) % nu) * nv;
    for (std::size_t j = 0; j < nv; ++j) {
      const std::size_t jp = (j + 1) % nv;
      const std::size_t jm = (j + nv - 1) % nv;
      y[r + j] = detail::stencil_node(s, x.data(), r + j, r, rn, rs, j, jp, jm);
    }
  }
}

// Four interleaved partial sums, lane = index mod 4, matching the AVX2 register layout.
double dot(std::span<const double> x, std::span<const double> y) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) lane[i & 3] = lane[i & 3] + x[i] * y[i];
  return detail::combine_lanes(lane);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = y[i] + alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
}

void multiply(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
}

}  // namespace hlmcf::simd::scalar
