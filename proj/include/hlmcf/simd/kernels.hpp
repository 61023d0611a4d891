#pragma once

// Data-parallel inner loops shared by the Laplace-Beltrami operator and the
// eigensolver. Each kernel has a scalar reference and an AVX2 variant; both
// perform the same floating-point operations in the same order, so results
// are bit-identical and dispatch never changes output.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace hlmcf::simd {

/// Nine-point stencil on a doubly periodic nu x nv grid (node n = i * nv + j,
/// i along u, j along v). Weight arrays are indexed by the output node.
struct Stencil9 {
  enum Tap { C = 0, E, W, N, S, NE, NW, SE, SW, kTaps };
  std::size_t nu = 0, nv = 0;
  std::array<std::vector<double>, kTaps> w;

  std::size_t size() const { return nu * nv; }
};

enum class Isa { Scalar, Avx2 };

/// Best available ISA, overridable with HLMCF_SIMD=scalar|avx2|auto.
Isa active_isa();
bool isa_supported(Isa isa);
std::string_view isa_name(Isa isa);

// Dispatching entry points.
void stencil_apply(const Stencil9& s, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta * y
void xpby(std::span<const double> x, double beta, std::span<double> y);
/// out = x * y (elementwise)
void multiply(std::span<const double> x, std::span<const double> y, std::span<double> out);

namespace scalar {
void stencil_apply(const Stencil9& s, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y);
void multiply(std::span<const double> x, std::span<const double> y, std::span<double> out);
}  // namespace scalar

namespace avx2 {
void stencil_apply(const Stencil9& s, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y);
void multiply(std::span<const double> x, std::span<const double> y, std::span<double> out);
}  // namespace avx2

namespace detail {

// One output node; the scalar reference and the AVX2 edge columns share it.
inline double stencil_node(const Stencil9& s, const double* x, std::size_t n, std::size_t r,
                           std::size_t rn, std::size_t rs, std::size_t j, std::size_t jp,
                           std::size_t jm) {
  double y = s.w[Stencil9::C][n] * x[r + j];
  y = y + s.w[Stencil9::E][n] * x[r + jp];
  y = y + s.w[Stencil9::W][n] * x[r + jm];
  y = y + s.w[Stencil9::N][n] * x[rn + j];
  y = y + s.w[Stencil9::S][n] * x[rs + j];
  y = y + s.w[Stencil9::NE][n] * x[rn + jp];
  y = y + s.w[Stencil9::NW][n] * x[rn + jm];
  y = y + s.w[Stencil9::SE][n] * x[rs + jp];
  y = y + s.w[Stencil9::SW][n] * x[rs + jm];
  return y;
}

inline double combine_lanes(const double (&lane)[4]) { return (lane[0] + lane[1]) + (lane[2] + lane[3]); }

}  // namespace detail
}  // namespace hlmcf::simd
