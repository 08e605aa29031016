#include <doctest.h>

#include <random>
#include <vector>

#include <wnl/simd_kernels.hpp>

using namespace wnl::simd;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::fabs(a[i] - b[i]));
    den = std::max(den, std::fabs(b[i]));
  }
  return num / std::max(den, 1e-300);
}

}  // namespace

TEST_CASE("dispatch reports an isa") {
  const Isa isa = active_isa();
  CHECK((isa == Isa::Scalar || isa == Isa::Avx2));
  if (isa == Isa::Avx2) CHECK(avx2_available());
}

TEST_CASE("avx2 kernels match the scalar reference") {
  if (!avx2_available()) {
    MESSAGE("AVX2 unavailable on this host; equivalence test skipped");
    return;
  }
  const Kernels& s = kernels_for(Isa::Scalar);
  const Kernels& v = kernels_for(Isa::Avx2);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 33u, 1000u}) {
    const auto a = noise(n, 1), b = noise(n, 2), c = noise(n, 3), d = noise(n, 4);
    std::vector<double> o1(n), o2(n), p1(n), p2(n);

    s.cube_shift(a.data(), -1.7, o1.data(), n);
    v.cube_shift(a.data(), -1.7, o2.data(), n);
    CHECK(rel_err(o2, o1) <= 1e-15);

    s.residual_forcing(a.data(), b.data(), c.data(), d.data(), o1.data(), n);
    v.residual_forcing(a.data(), b.data(), c.data(), d.data(), o2.data(), n);
    CHECK(rel_err(o2, o1) <= 1e-14);

    s.wick_powers(a.data(), 0.8, o1.data(), p1.data(), n);
    v.wick_powers(a.data(), 0.8, o2.data(), p2.data(), n);
    CHECK(rel_err(o2, o1) <= 1e-15);
    CHECK(rel_err(p2, p1) <= 1e-15);

    o1 = b;
    o2 = b;
    s.axpy(0.3, a.data(), o1.data(), n);
    v.axpy(0.3, a.data(), o2.data(), n);
    CHECK(rel_err(o2, o1) <= 1e-15);

    s.multiply(a.data(), b.data(), o1.data(), n);
    v.multiply(a.data(), b.data(), o2.data(), n);
    CHECK(rel_err(o2, o1) == 0.0);

    CHECK(v.max_abs(a.data(), n) == s.max_abs(a.data(), n));
    CHECK(v.sum_pow4(a.data(), n) == doctest::Approx(s.sum_pow4(a.data(), n)).epsilon(1e-13));

    const std::size_t m = n / 2;
    std::vector<std::complex<double>> z(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
      z[i] = {a[2 * i], a[2 * i + 1]};
      y[i] = {b[2 * i], b[2 * i + 1]};
    }
    std::vector<double> cs(m), sn(m), om(m), w(m);
    for (std::size_t i = 0; i < m; ++i) {
      om[i] = 1.0 + std::fabs(c[i]) * 5;
      cs[i] = std::cos(0.3 * om[i]);
      sn[i] = std::sin(0.3 * om[i]);
      w[i] = std::fabs(d[i]);
    }
    CHECK(v.weighted_sum_sq(z.data(), w.data(), m) ==
          doctest::Approx(s.weighted_sum_sq(z.data(), w.data(), m)).epsilon(1e-13));

    auto z1 = z, y1 = y, z2 = z, y2 = y;
    s.rotate_modes(z1.data(), y1.data(), cs.data(), sn.data(), om.data(), m);
    v.rotate_modes(z2.data(), y2.data(), cs.data(), sn.data(), om.data(), m);
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(std::abs(z1[i] - z2[i]) <= 1e-14 * (1 + std::abs(z1[i])));
      CHECK(std::abs(y1[i] - y2[i]) <= 1e-13 * (1 + std::abs(y1[i])));
    }

    s.scale_modes(z1.data(), w.data(), m);
    v.scale_modes(z2.data(), w.data(), m);
    for (std::size_t i = 0; i < m; ++i) CHECK(std::abs(z1[i] - z2[i]) <= 1e-14 * (1 + std::abs(z1[i])));
  }
}
