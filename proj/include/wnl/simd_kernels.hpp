#pragma once

// Grid and mode kernels used in the inner loops of the solver and the norms.
// Each kernel has a scalar reference version and an AVX2/FMA version; the
// dispatch table picks one at startup. WNLW_SIMD=scalar forces the reference.

#include <complex>
#include <cstddef>

namespace wnl::simd {

enum class Isa { Scalar, Avx2 };

struct Kernels {
  /// out[i] = v[i]^3 + c v[i]
  void (*cube_shift)(const double* v, double c, double* out, std::size_t n);
  /// out[i] = v^3 + 3 z1 v^2 + 3 Z2 w, with v = z2 + w
  void (*residual_forcing)(const double* z1, const double* Z2, const double* z2, const double* w,
                           double* out, std::size_t n);
  /// Z2 = z^2 - sigma, Z3 = z^3 - 3 sigma z
  void (*wick_powers)(const double* z, double sigma, double* Z2, double* Z3, std::size_t n);
  /// Exact linear flow per mode: (p, v) <- (c p + s v / w, -w s p + c v).
  void (*rotate_modes)(std::complex<double>* pos, std::complex<double>* vel, const double* cosv,
                       const double* sinv, const double* omega, std::size_t n);
  /// y[i] += a x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// out[i] = a[i] * b[i]
  void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
  /// sum_i w[i] |c[i]|^2
  double (*weighted_sum_sq)(const std::complex<double>* c, const double* w, std::size_t n);
  /// max_i |x[i]|
  double (*max_abs)(const double* x, std::size_t n);
  /// sum_i x[i]^4
  double (*sum_pow4)(const double* x, std::size_t n);
  /// c[i] *= w[i]
  void (*scale_modes)(std::complex<double>* c, const double* w, std::size_t n);
};

namespace scalar {
const Kernels& kernels();
}
namespace avx2 {
const Kernels& kernels();
}

/// True if the running CPU has AVX2 and FMA and the build carries them.
bool avx2_available();
Isa active_isa();
const char* isa_name(Isa isa);
const Kernels& kernels_for(Isa isa);
/// The dispatched table.
const Kernels& active();

}  // namespace wnl::simd
