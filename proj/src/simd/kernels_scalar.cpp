#include <wnl/simd_kernels.hpp>

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace wnl::simd {
namespace scalar {
namespace {

void cube_shift(const double* v, double c, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = v[i] * (v[i] * v[i] + c);
}

void residual_forcing(const double* z1, const double* Z2, const double* z2, const double* w,
                      double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = z2[i] + w[i];
    out[i] = v * v * (v + 3.0 * z1[i]) + 3.0 * Z2[i] * w[i];
  }
}

void wick_powers(const double* z, double sigma, double* Z2, double* Z3, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double zz = z[i] * z[i];
    Z2[i] = zz - sigma;
    Z3[i] = z[i] * (zz - 3.0 * sigma);
  }
}

void rotate_modes(std::complex<double>* pos, std::complex<double>* vel, const double* cosv,
                  const double* sinv, const double* omega, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> p = pos[i];
    const std::complex<double> v = vel[i];
    pos[i] = cosv[i] * p + (sinv[i] / omega[i]) * v;
    vel[i] = (-omega[i] * sinv[i]) * p + cosv[i] * v;
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

double weighted_sum_sq(const std::complex<double>* c, const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::norm(c[i]);
  return acc;
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(x[i]));
  return m;
}

double sum_pow4(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = x[i] * x[i];
    acc += q * q;
  }
  return acc;
}

void scale_modes(std::complex<double>* c, const double* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) c[i] *= w[i];
}

}  // namespace

const Kernels& kernels() {
  static const Kernels k{cube_shift, residual_forcing, wick_powers, rotate_modes, axpy,
                         multiply,   weighted_sum_sq,  max_abs,     sum_pow4,     scale_modes};
  return k;
}

}  // namespace scalar

bool avx2_available() {
#if defined(WNL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() {
  static const Isa isa = [] {
    const char* env = std::getenv("WNLW_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    return avx2_available() ? Isa::Avx2 : Isa::Scalar;
  }();
  return isa;
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const Kernels& kernels_for(Isa isa) {
#if defined(WNL_HAVE_AVX2)
  if (isa == Isa::Avx2) return avx2::kernels();
#endif
  (void)isa;
  return scalar::kernels();
}

const Kernels& active() {
  static const Kernels& k = kernels_for(active_isa());
  return k;
}

}  // namespace wnl::simd
