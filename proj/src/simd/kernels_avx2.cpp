// Compiled with -mavx2 -mfma; only reached when the CPU reports both.
#include <wnl/simd_kernels.hpp>

#include <immintrin.h>

#include <cmath>

namespace wnl::simd::avx2 {
namespace {

// [a0, a0, a1, a1] from two consecutive doubles.
inline __m256d dup_pairs(const double* a) {
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(a)), 0x50);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void cube_shift(const double* v, double c, double* out, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(v + i);
    const __m256d x2 = _mm256_mul_pd(x, x);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(x, _mm256_add_pd(x2, vc)));
  }
  for (; i < n; ++i) out[i] = v[i] * (v[i] * v[i] + c);
}

void residual_forcing(const double* z1, const double* Z2, const double* z2, const double* w,
                      double* out, std::size_t n) {
  const __m256d three = _mm256_set1_pd(3.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wv = _mm256_loadu_pd(w + i);
    const __m256d v = _mm256_add_pd(_mm256_loadu_pd(z2 + i), wv);
    const __m256d v2 = _mm256_mul_pd(v, v);
    // v^2 (v + 3 z1) + 3 Z2 w
    const __m256d a = _mm256_fmadd_pd(three, _mm256_loadu_pd(z1 + i), v);
    const __m256d b = _mm256_mul_pd(_mm256_mul_pd(three, _mm256_loadu_pd(Z2 + i)), wv);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(v2, a, b));
  }
  for (; i < n; ++i) {
    const double v = z2[i] + w[i];
    out[i] = v * v * (v + 3.0 * z1[i]) + 3.0 * Z2[i] * w[i];
  }
}

void wick_powers(const double* z, double sigma, double* Z2, double* Z3, std::size_t n) {
  const __m256d s = _mm256_set1_pd(sigma);
  const __m256d s3 = _mm256_set1_pd(3.0 * sigma);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(z + i);
    const __m256d xx = _mm256_mul_pd(x, x);
    _mm256_storeu_pd(Z2 + i, _mm256_sub_pd(xx, s));
    _mm256_storeu_pd(Z3 + i, _mm256_mul_pd(x, _mm256_sub_pd(xx, s3)));
  }
  for (; i < n; ++i) {
    const double xx = z[i] * z[i];
    Z2[i] = xx - sigma;
    Z3[i] = z[i] * (xx - 3.0 * sigma);
  }
}

void rotate_modes(std::complex<double>* pos, std::complex<double>* vel, const double* cosv,
                  const double* sinv, const double* omega, std::size_t n) {
  double* p = reinterpret_cast<double*>(pos);
  double* v = reinterpret_cast<double*>(vel);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d c = dup_pairs(cosv + i);
    const __m256d s = dup_pairs(sinv + i);
    const __m256d w = dup_pairs(omega + i);
    const __m256d pv = _mm256_loadu_pd(p + 2 * i);
    const __m256d vv = _mm256_loadu_pd(v + 2 * i);
    const __m256d np = _mm256_fmadd_pd(c, pv, _mm256_mul_pd(_mm256_div_pd(s, w), vv));
    const __m256d nv = _mm256_fmadd_pd(c, vv, _mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(w, s)), pv));
    _mm256_storeu_pd(p + 2 * i, np);
    _mm256_storeu_pd(v + 2 * i, nv);
  }
  for (; i < n; ++i) {
    const std::complex<double> a = pos[i];
    const std::complex<double> b = vel[i];
    pos[i] = cosv[i] * a + (sinv[i] / omega[i]) * b;
    vel[i] = (-omega[i] * sinv[i]) * a + cosv[i] * b;
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

double weighted_sum_sq(const std::complex<double>* c, const double* w, std::size_t n) {
  const double* d = reinterpret_cast<const double*>(c);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d x = _mm256_loadu_pd(d + 2 * i);
    acc = _mm256_fmadd_pd(dup_pairs(w + i), _mm256_mul_pd(x, x), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * std::norm(c[i]);
  return s;
}

double max_abs(const double* x, std::size_t n) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; i < n; ++i) r = std::fmax(r, std::fabs(x[i]));
  return r;
}

double sum_pow4(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d q = _mm256_mul_pd(v, v);
    acc = _mm256_fmadd_pd(q, q, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double q = x[i] * x[i];
    s += q * q;
  }
  return s;
}

void scale_modes(std::complex<double>* c, const double* w, std::size_t n) {
  double* d = reinterpret_cast<double*>(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    _mm256_storeu_pd(d + 2 * i, _mm256_mul_pd(dup_pairs(w + i), _mm256_loadu_pd(d + 2 * i)));
  for (; i < n; ++i) c[i] *= w[i];
}

}  // namespace

const Kernels& kernels() {
  static const Kernels k{cube_shift, residual_forcing, wick_powers, rotate_modes, axpy,
                         multiply,   weighted_sum_sq,  max_abs,     sum_pow4,     scale_modes};
  return k;
}

}  // namespace wnl::simd::avx2
