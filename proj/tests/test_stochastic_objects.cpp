#include <doctest.h>

#include <cmath>
#include <vector>

#include <wnl/renormalization.hpp>
#include <wnl/stochastic_objects.hpp>

#include "test_util.hpp"

using namespace wnl;
using wnl::testing::max_abs;
using wnl::testing::max_abs_diff;

namespace {

struct Stat {
  double mean = 0, se = 0;
};

Stat stat(const std::vector<double>& x) {
  double m = 0;
  for (double v : x) m += v;
  m /= double(x.size());
  double var = 0;
  for (double v : x) var += (v - m) * (v - m);
  var /= double(x.size() - 1);
  return {m, std::sqrt(var / double(x.size()))};
}

GaussianDraw single_pair_draw(int n_max) {
  GaussianDraw d = GaussianDraw::zeros(n_max);
  d.g.set_pair({1, 0, 0}, 1.0);
  return d;
}

}  // namespace

TEST_CASE("z1 of a single conjugate pair") {
  const double alpha = 1.3, t = 0.8;
  const SpectralField z = z1_at(single_pair_draw(3), 3, alpha, t);
  const double expect = std::cos(t * std::sqrt(2.0)) / std::pow(2.0, alpha / 2);
  CHECK(z.at({1, 0, 0}).real() == doctest::Approx(expect).epsilon(1e-14));
  CHECK(z.at({-1, 0, 0}).real() == doctest::Approx(expect).epsilon(1e-14));
  // grid value at x = 0 is 2 cos(t sqrt 2) / 2^{alpha/2}
  CHECK(point_value(z, {0, 0, 0}) == doctest::Approx(2 * expect).epsilon(1e-14));
}

TEST_CASE("z1 at t = 0 is the initial data and solves the linear equation") {
  const GaussianDraw d = sample_draw(3, 5);
  const double alpha = 1.4;
  CHECK(max_abs_diff(z1_at(d, 5, alpha, 0.0), truncated_data(d, 5, alpha).position) <= 1e-15);
  CHECK(max_abs_diff(z1_velocity_at(d, 5, alpha, 0.0), truncated_data(d, 5, alpha).velocity) <= 1e-14);
  const double C = solve_CN(alpha, 5).C_N;
  CHECK(max_abs_diff(z1_at(d, 5, alpha, 0.0, C), modified_data(d, 5, alpha, C).position) <= 1e-15);

  for (double mass : {1.0, C}) {
    const double t = 0.4, h = 1e-4;
    const SpectralField zp = z1_at(d, 5, alpha, t + h, mass);
    const SpectralField z0 = z1_at(d, 5, alpha, t, mass);
    const SpectralField zm = z1_at(d, 5, alpha, t - h, mass);
    const SpectralField v = z1_velocity_at(d, 5, alpha, t, mass);
    const auto r2 = z0.box().norms_sq();
    for (std::size_t i = 0; i < z0.size(); ++i) {
      const Complex acc = (zp[i] - 2.0 * z0[i] + zm[i]) / (h * h);
      CHECK(std::abs(acc + (mass + r2[i]) * z0[i]) <= 1e-5 * (1 + r2[i]));
      CHECK(std::abs((zp[i] - zm[i]) / (2 * h) - v[i]) <= 1e-6 * (1 + r2[i]));
    }
    CHECK(z0.is_hermitian(0.0));
  }
  CHECK_THROWS_AS(z1_at(d, 6, alpha, 0.0), std::invalid_argument);
}

TEST_CASE("wick powers of a constant") {
  SpectralField z{FrequencyBox(2)};
  z.set_pair({0, 0, 0}, 1.5);
  const SpectralField Z2 = wick_square(z, 2.0);
  const SpectralField Z3 = wick_cube(z, 2.0);
  CHECK(Z2.cutoff() == 4);
  CHECK(Z3.cutoff() == 6);
  CHECK(Z2.at({0, 0, 0}).real() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(Z3.at({0, 0, 0}).real() == doctest::Approx(-5.625).epsilon(1e-14));
  CHECK(max_abs(Z3) == doctest::Approx(5.625).epsilon(1e-14));
}

TEST_CASE("wick powers equal direct convolutions") {
  for (int N = 1; N <= 3; ++N) {
    const SpectralField z = wnl::testing::random_field(N, 60 + N, 1.0);
    const double s = 0.7;
    SpectralField sq = wnl::testing::brute_convolution(z, z, 2 * N);
    sq[sq.box().zero_index()] -= s;
    CHECK(max_abs_diff(wick_square(z, s), sq) <= 1e-12 * max_abs(sq));
    SpectralField cube = wnl::testing::brute_convolution(wnl::testing::brute_convolution(z, z, 2 * N), z, 3 * N);
    cube.add_scaled(z.resized(3 * N), -3 * s);
    CHECK(max_abs_diff(wick_cube(z, s), cube) <= 1e-12 * max_abs(cube));
    CHECK(max_abs_diff(wick_cube_projected(z, s, N), cube.resized(N)) <= 1e-12 * max_abs(cube));
  }
}

TEST_CASE("pointwise Wick moments at 1e4 draws") {
  const double alpha = 1.4;
  const int N = 6, S = 10000;
  const double sigma = sigma_exact(alpha, N);
  const PointSampler ps({N}, alpha, 0.25, {0.3, 1.7, 4.0});
  std::vector<double> v1(S), v2(S), v3(S), m2(S);
  for (int s = 0; s < S; ++s) {
    const double z = ps.sample(5000 + s)[0];
    const double Z2 = z * z - sigma, Z3 = z * (z * z - 3 * sigma);
    v1[s] = z * z;
    v2[s] = Z2 * Z2;
    v3[s] = Z3 * Z3;
    m2[s] = Z2;
  }
  Stat st = stat(v1);
  CHECK(std::fabs(st.mean - sigma) <= 3 * st.se);
  st = stat(v2);
  CHECK(std::fabs(st.mean - 2 * sigma * sigma) <= 3 * st.se);
  st = stat(v3);
  CHECK(std::fabs(st.mean - 6 * sigma * sigma * sigma) <= 3 * st.se);
  st = stat(m2);
  CHECK(std::fabs(st.mean) <= 3 * st.se);
}

TEST_CASE("point sampler agrees with the field") {
  const GaussianDraw d = sample_draw(91, 5);
  const Point x{0.2, 2.2, 5.1};
  const PointSampler ps({2, 5}, 1.4, 0.6, x, 3.0);
  const auto v = ps.sample(91);
  CHECK(v[0] == doctest::Approx(point_value(z1_at(d, 2, 1.4, 0.6, 3.0), x)).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(point_value(z1_at(d, 5, 1.4, 0.6, 3.0), x)).epsilon(1e-12));
}

TEST_CASE("Duhamel quadrature on constant forcing") {
  for (double a : {1.0, 7.0}) {
    const double h = 1.0 / 256;
    TrapezoidDuhamel duh(FrequencyBox(1), a, h);
    SpectralField F{FrequencyBox(1)};
    F.set_pair({0, 0, 0}, 2.0);
    for (int k = 0; k <= 256; ++k) duh.push(F);
    const double t = duh.last_time();
    CHECK(t == doctest::Approx(1.0));
    const double exact = 2.0 / a * (1 - std::cos(std::sqrt(a) * t));
    CHECK(duh.value().at({0, 0, 0}).real() == doctest::Approx(exact).epsilon(1e-4));
    CHECK(duh.velocity().at({0, 0, 0}).real() ==
          doctest::Approx(2.0 / std::sqrt(a) * std::sin(std::sqrt(a) * t)).epsilon(1e-4));
    // the z2 sign convention: z2 = -L^{-1} Z3
    SpectralField neg = F;
    neg *= -1.0;
    TrapezoidDuhamel d2(FrequencyBox(1), a, h);
    for (int k = 0; k <= 256; ++k) d2.push(neg);
    CHECK(d2.value().at({0, 0, 0}).real() == doctest::Approx(-exact).epsilon(1e-4));
  }
}

TEST_CASE("z2 vanishes at t = 0 and converges at second order") {
  const GaussianDraw d = sample_draw(17, 4);
  const double alpha = 1.4, sigma = sigma_exact(alpha, 4);
  const std::vector<double> times{0.0, 0.25, -0.25, 0.5};
  const auto z = z2_trajectory(d, 4, alpha, times, 1.0, sigma, 1.0 / 32);
  CHECK(max_abs(z[0]) == 0.0);
  CHECK(z[1].is_hermitian(1e-12));

  const std::vector<double> T{0.5};
  const double dt = 1.0 / 16;
  const SpectralField ref = z2_trajectory(d, 4, alpha, T, 1.0, sigma, dt / 8)[0];
  const SpectralField a = z2_trajectory(d, 4, alpha, T, 1.0, sigma, dt)[0];
  const SpectralField b = z2_trajectory(d, 4, alpha, T, 1.0, sigma, dt / 2)[0];
  const double ea = std::sqrt(sobolev_norm_sq(a - ref, 0.0));
  const double eb = std::sqrt(sobolev_norm_sq(b - ref, 0.0));
  // Richardson against a dt/8 reference: (1 - 1/64) / (1/4 - 1/64) = 4.2
  CHECK(ea / eb >= 3.5);
  CHECK(ea / eb <= 4.5);

  // off-node time uses a shortened final panel and stays close to the node value
  const std::vector<double> off{0.5 + 1e-3};
  const SpectralField c = z2_trajectory(d, 4, alpha, off, 1.0, sigma, dt / 8)[0];
  CHECK(std::sqrt(sobolev_norm_sq(c - ref, 0.0)) < 0.05 * std::sqrt(sobolev_norm_sq(ref, 0.0)) + 1e-12);
  CHECK_THROWS_AS(z2_trajectory(d, 4, alpha, std::vector<double>{}, 1.0, sigma, dt), std::invalid_argument);
}

TEST_CASE("Z5 split") {
  const SpectralField zero2{FrequencyBox(6)};
  const SpectralField z2 = wnl::testing::random_field(3, 4, 1.0);
  const Z5Split s0 = z5_at(zero2, z2);
  CHECK(max_abs(s0.total) == 0.0);
  for (int N = 1; N <= 3; ++N) {
    const SpectralField Z2 = wnl::testing::random_field(2 * N, 30 + N, 0.5);
    const SpectralField w = wnl::testing::random_field(N, 40 + N, 1.5);
    const Z5Split s = z5_at(Z2, w);
    const SpectralField direct = wnl::testing::brute_convolution(Z2, w, N);
    CHECK(max_abs_diff(s.total, direct) <= 1e-12 * max_abs(direct));
    CHECK(max_abs_diff(s.low + s.resonant + s.high, dealiased_product(Z2, w.resized(2 * N), N)) <=
          1e-10 * max_abs(direct));
  }
}

TEST_CASE("enhanced source is consistent with the standalone constructors") {
  const GaussianDraw d = sample_draw(23, 4);
  const double alpha = 1.4, sigma = sigma_exact(alpha, 4), dtq = 1.0 / 64;
  std::vector<double> times{0.0, 0.125, 0.25};
  const EnhancedDataSet set = build_enhanced(d, 4, alpha, 1.0, sigma, times, dtq);
  REQUIRE(set.z2.size() == 3);
  CHECK(max_abs(set.z2[0]) == 0.0);
  const auto z2 = z2_trajectory(d, 4, alpha, times, 1.0, sigma, dtq);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK(max_abs_diff(set.z2[k], z2[k]) <= 1e-13 * (1 + max_abs(z2[k])));
    CHECK(max_abs_diff(set.Z2[k], wick_square(set.z1[k], sigma)) <= 1e-12 * max_abs(set.Z2[k]));
    // n = 0 coefficient of Z2: grid mean of z1^2 minus sigma
    const GridField g = to_grid(set.z1[k], 20);
    double mean = 0;
    for (double v : g.values) mean += v * v;
    mean /= double(g.size());
    CHECK(set.Z2[k].at({0, 0, 0}).real() == doctest::Approx(mean - sigma).epsilon(1e-12));
    CHECK(max_abs_diff(set.Z5[k], set.Z5_low[k] + set.Z5_res[k] + set.Z5_high[k]) <=
          1e-10 * (1 + max_abs(set.Z5[k])));
    CHECK(set.z1[k].is_hermitian(0.0));
    CHECK(set.Z5[k].is_hermitian(0.0));
  }
  EnhancedSource src(d, 4, alpha, 1.0, sigma, dtq);
  src.at(0.25);
  CHECK_THROWS_AS(src.at(0.125), std::invalid_argument);
  CHECK_THROWS_AS(src.at(0.2501), std::invalid_argument);
}

TEST_CASE("closed-form tail variances") {
  CHECK(exact_diff_variance(1, 1.5, 0, 1) == doctest::Approx(6 * std::pow(2.0, -1.5)).epsilon(1e-14));
  CHECK(exact_diff_variance(1, 1.5, 0, 1) == doctest::Approx(2.12132).epsilon(1e-5));
  CHECK(exact_diff_variance(2, 1.5, 0, 1) == doctest::Approx(4 * 6 * std::pow(2.0, -1.5) + 9.0).epsilon(1e-14));
  CHECK(exact_diff_variance(2, 1.5, 0, 1) == doctest::Approx(17.48528).epsilon(1e-6));
  CHECK(exact_diff_variance(3, 1.4, 5, 5) == 0.0);
  CHECK_THROWS_AS(exact_diff_variance(1, 1.4, 5, 4), std::invalid_argument);
}

TEST_CASE("Monte Carlo tail variances") {
  const double alpha = 1.5;
  const int S = 10000;
  const int N = 1, M = 3;
  const PointSampler ps({N, M}, alpha, 0.7, {1.0, 0.5, 0.0});
  const double sN = sigma_exact(alpha, N), sM = sigma_exact(alpha, M);
  std::vector<double> d1(S), d2(S), d3(S);
  for (int s = 0; s < S; ++s) {
    const auto v = ps.sample(900000 + s);
    const double a = v[0], b = v[1];
    d1[s] = std::pow(b - a, 2);
    d2[s] = std::pow((b * b - sM) - (a * a - sN), 2);
    d3[s] = std::pow(b * (b * b - 3 * sM) - a * (a * a - 3 * sN), 2);
  }
  const std::vector<double>* d[3] = {&d1, &d2, &d3};
  for (int j = 1; j <= 3; ++j) {
    const Stat st = stat(*d[j - 1]);
    CHECK(std::fabs(st.mean - exact_diff_variance(j, alpha, N, M)) <= 3 * st.se);
  }
}

TEST_CASE("chaos moment ratios") {
  const Estimate z1 = moment_ratio(ObjectSelector::z1, 4, 10000, 1);
  CHECK(std::fabs(z1.value - std::pow(3.0, 0.25)) <= 3 * z1.stderr_);
  CHECK(z1.value <= std::sqrt(3.0));
  CHECK(moment_ratio(ObjectSelector::Z2, 4, 10000, 1).value <= 3.0);
  CHECK(moment_ratio(ObjectSelector::Z3, 4, 10000, 1).value <= std::pow(3.0, 1.5));
  CHECK_THROWS_AS(moment_ratio(ObjectSelector::z1, 4, 50, 1), std::invalid_argument);
}

TEST_CASE("modulus of continuity") {
  const std::vector<double> h{0.0, 1.0 / 256, 1.0 / 128, 1.0 / 64, 1.0 / 32, 1.0 / 16};
  const auto a = modulus_of_continuity(ObjectSelector::z1, 0.2, h, NormSpec::sobolev(0.0), 40, 100, 1.4, 6);
  const auto b = modulus_of_continuity(ObjectSelector::z1, 0.2, h, NormSpec::sobolev(0.0), 40, 500, 1.4, 6);
  CHECK(a.rows[0].mean == 0.0);
  CHECK(a.slope > 0);
  CHECK(std::fabs(a.slope - b.slope) <= 0.1);
  for (std::size_t k = 1; k < h.size(); ++k) CHECK(a.rows[k].mean >= a.rows[k - 1].mean - 3 * a.rows[k].stderr_);
  const auto c = modulus_of_continuity(ObjectSelector::Z2, 0.2, h, NormSpec::sobolev(-0.5), 10, 100, 1.4, 4);
  CHECK(c.slope > 0);
}
