#include <cstdlib>
#include <string>

#include "hlmcf/simd/kernels.hpp"

namespace hlmcf::simd {

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa active_isa() {
  static const Isa isa = [] {
    const char* env = std::getenv("HLMCF_SIMD");
    const std::string pref = env ? env : "auto";
    if (pref == "scalar") return Isa::Scalar;
    return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
  }();
  return isa;
}

void stencil_apply(const Stencil9& s, std::span<const double> x, std::span<double> y) {
  active_isa() == Isa::Avx2 ? avx2::stencil_apply(s, x, y) : scalar::stencil_apply(s, x, y);
}

double dot(std::span<const double> x, std::span<const double> y) {
  return active_isa() == Isa::Avx2 ? avx2::dot(x, y) : scalar::dot(x, y);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active_isa() == Isa::Avx2 ? avx2::axpy(alpha, x, y) : scalar::axpy(alpha, x, y);
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
  active_isa() == Isa::Avx2 ? avx2::xpby(x, beta, y) : scalar::xpby(x, beta, y);
}

void multiply(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  active_isa() == Isa::Avx2 ? avx2::multiply(x, y, out) : scalar::multiply(x, y, out);
}

}  // namespace hlmcf::simd
