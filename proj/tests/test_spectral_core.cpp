#include <doctest.h>

#include <cmath>
#include <sstream>

#include <wnl/field_io.hpp>
#include <wnl/spectral_core.hpp>

#include "test_util.hpp"

using namespace wnl;
using wnl::testing::max_abs;
using wnl::testing::max_abs_diff;
using wnl::testing::random_field;

TEST_CASE("bracket values") {
  CHECK(bracket({0, 0, 0}) == 1.0);
  CHECK(bracket({1, 2, 2}) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));
  CHECK(bracket({0, 0, 3}) == doctest::Approx(3.16228).epsilon(1e-5));
}

TEST_CASE("fft friendly sizes") {
  CHECK(fft_friendly_size(13) == 14);
  CHECK(fft_friendly_size(11) == 12);
  CHECK(fft_friendly_size(129) == 135);
  CHECK(default_grid_size(4) == 14);
  const int two[2] = {4, 4};
  CHECK(product_grid_size(two, 4) >= 13);
}

TEST_CASE("box enumeration is lexicographic and symmetric") {
  FrequencyBox box(3);
  const auto modes = box.modes();
  for (std::size_t i = 1; i < modes.size(); ++i) CHECK(modes[i - 1] < modes[i]);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const Mode& n = modes[i];
    CHECK(box.mode(box.negated(i)) == Mode{-n[0], -n[1], -n[2]});
  }
  CHECK(box.mode(box.zero_index()) == Mode{0, 0, 0});
  CHECK(!box.find({3, 1, 0}));
  CHECK(box.grid_size() >= 3 * 3 + 1);
}

TEST_CASE("cosine pair maps to cos(n.x) on the grid") {
  SpectralField f{FrequencyBox(3)};
  const Mode n{1, -2, 1};
  f.set_pair(n, 0.5);
  const GridField g = to_grid(f);
  const int M = g.grid_size;
  double err = 0.0;
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int c = 0; c < M; ++c) {
        const double x = 2 * kPi / M;
        const double expect = std::cos(x * (n[0] * a + n[1] * b + n[2] * c));
        err = std::max(err, std::fabs(g.values[(std::size_t(a) * M + b) * M + c] - expect));
      }
  CHECK(err < 1e-13);
}

TEST_CASE("constant mode maps to constant grid") {
  SpectralField f{FrequencyBox(2)};
  f.set_pair({0, 0, 0}, 2.5);
  for (double v : to_grid(f).values) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("round trip on seeded fields") {
  for (int N : {0, 1, 4, 9}) {
    const SpectralField f = random_field(N, 11 + N);
    const SpectralField back = to_spectral(to_grid(f), N);
    CHECK(max_abs_diff(f, back) <= 1e-12 * max_abs(f));
    CHECK(back.is_hermitian(0.0));
  }
}

TEST_CASE("transform errors") {
  SpectralField f{FrequencyBox(2)};
  f[0] = Complex(1.0, 0.0);  // no partner at -n
  CHECK_THROWS_AS(to_grid(f), std::invalid_argument);
  const GridField g = to_grid(random_field(2, 3));
  CHECK_THROWS_AS(to_spectral(g, 4), std::invalid_argument);
}

TEST_CASE("point evaluation matches the grid") {
  const SpectralField f = random_field(3, 5);
  const GridField g = to_grid(f);
  const int M = g.grid_size;
  const Point x{2 * kPi * 2 / M, 2 * kPi * 5 / M, 2 * kPi * 1 / M};
  CHECK(point_value(f, x) == doctest::Approx(g.values[(2 * M + 5) * M + 1]).epsilon(1e-12));
}

TEST_CASE("bessel potential") {
  const SpectralField f = random_field(5, 8);
  CHECK(max_abs_diff(apply_bessel(f, 0.0), f) == 0.0);
  SpectralField c{FrequencyBox(2)};
  c.set_pair({1, 0, 0}, 0.5);
  const SpectralField b = apply_bessel(c, 0.5);
  CHECK(b.at({1, 0, 0}).real() == doctest::Approx(0.5 * std::pow(2.0, 0.25)).epsilon(1e-15));
  CHECK(max_abs_diff(apply_bessel(apply_bessel(f, 0.7), -0.7), f) <= 1e-12 * max_abs(f));
}

TEST_CASE("littlewood-paley blocks") {
  CHECK(lp_block_index(0) == 0);
  CHECK(lp_block_index(1) == 0);
  CHECK(lp_block_index(2) == 1);
  CHECK(lp_block_index(4) == 1);
  CHECK(lp_block_index(5) == 2);
  CHECK(lp_block_index(16) == 2);
  CHECK(lp_block_index(17) == 3);

  const SpectralField f = random_field(9, 21);
  SpectralField sum{f.box()};
  for (int j = 0; j < lp_block_count(9); ++j) sum += lp_block(f, j);
  CHECK(max_abs_diff(sum, f) == 0.0);

  SpectralField shell{FrequencyBox(6)};
  shell.set_pair({4, 0, 0}, 1.0);
  shell.set_pair({0, 0, 4}, Complex(0.3, 0.2));
  for (int j = 0; j < lp_block_count(6); ++j) {
    const SpectralField b = lp_block(shell, j);
    CHECK(max_abs_diff(b, j == 2 ? shell : SpectralField(shell.box())) == 0.0);
  }
  SpectralField one{FrequencyBox(2)};
  one.set_pair({1, 0, 0}, 1.0);
  CHECK(max_abs_diff(lp_block(one, 0), one) == 0.0);
}

TEST_CASE("dealiased product identities") {
  SpectralField c{FrequencyBox(2)};
  c.set_pair({1, 0, 0}, 0.5);
  const SpectralField p = dealiased_product(c, c, 4);
  CHECK(p.at({0, 0, 0}).real() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p.at({2, 0, 0}).real() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::abs(p.at({1, 0, 0})) <= 1e-15);

  const SpectralField f = random_field(4, 2);
  SpectralField one{FrequencyBox(4)};
  one.set_pair({0, 0, 0}, 1.0);
  CHECK(max_abs_diff(dealiased_product(f, one, 4), f) <= 1e-12 * max_abs(f));
}

TEST_CASE("dealiased product equals direct convolution for N <= 3") {
  for (int N = 0; N <= 3; ++N) {
    const SpectralField f = random_field(N, 100 + N);
    const SpectralField g = random_field(N, 200 + N, 0.5);
    for (int out : {N, 2 * N}) {
      const SpectralField fast = dealiased_product(f, g, out);
      const SpectralField slow = wnl::testing::brute_convolution(f, g, out);
      CHECK(max_abs_diff(fast, slow) <= 1e-12 * std::max(1.0, max_abs(slow)));
    }
  }
}

TEST_CASE("paraproduct split") {
  SUBCASE("separated supports") {
    SpectralField f{FrequencyBox(20)}, g{FrequencyBox(20)};
    f.set_pair({1, 0, 0}, 0.7);
    g.set_pair({0, 18, 0}, Complex(0.2, -0.4));
    const ParaproductSplit s = paraproduct_split(f, g);
    const SpectralField prod = dealiased_product(f, g);
    CHECK(max_abs_diff(s.low, prod) <= 1e-13);
    CHECK(max_abs(s.resonant) <= 1e-13);
    CHECK(max_abs(s.high) <= 1e-13);
  }
  SUBCASE("same block is resonant") {
    SpectralField f{FrequencyBox(8)};
    f.set_pair({3, 0, 0}, 1.0);
    f.set_pair({0, 2, 2}, Complex(0.1, 0.5));
    const ParaproductSplit s = paraproduct_split(f, f);
    CHECK(max_abs(s.low) <= 1e-13);
    CHECK(max_abs(s.high) <= 1e-13);
    CHECK(max_abs_diff(s.resonant, dealiased_product(f, f)) <= 1e-13);
  }
  SUBCASE("pieces sum to the product") {
    for (int N : {4, 9}) {
      const SpectralField f = random_field(N, 40 + N, 1.0);
      const SpectralField g = random_field(N, 50 + N, 0.3);
      for (int out : {N, 2 * N}) {
        const ParaproductSplit s = paraproduct_split(f, g, out);
        const SpectralField prod = dealiased_product(f, g, out);
        CHECK(max_abs_diff(s.total(), prod) <= 1e-10 * max_abs(prod));
      }
    }
  }
  CHECK_THROWS_AS(paraproduct_split(random_field(3, 1), random_field(4, 1)), std::invalid_argument);
}

TEST_CASE("norms") {
  SpectralField c{FrequencyBox(3)};
  c.set_pair({1, 0, 0}, 0.5);
  const double h12 = norm(c, NormSpec::sobolev(0.5));
  CHECK(h12 * h12 == doctest::Approx(kTorusVolume * std::sqrt(2.0) / 2).epsilon(1e-14));
  CHECK(norm(c, NormSpec::sup(0.5)) == doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-13));
  // int cos^4 over T^3 = (2pi)^3 * 3/8
  const double l4 = norm(c, NormSpec::lebesgue(4.0));
  CHECK(std::pow(l4, 4) == doctest::Approx(kTorusVolume * 3.0 / 8.0).epsilon(1e-13));
  CHECK(norm(to_grid(c), NormSpec::lebesgue(4.0)) == doctest::Approx(l4).epsilon(1e-12));
  CHECK(norm(c, NormSpec::lebesgue(2.0)) == doctest::Approx(std::sqrt(kTorusVolume / 2)).epsilon(1e-14));
  CHECK(norm(c, NormSpec::lebesgue(3.0)) > 0.0);
  CHECK_THROWS_AS(norm(c, NormSpec{NormKind::SobolevWsp, 0.0, 0.5, 2.0}), std::invalid_argument);
}

TEST_CASE("besov and sobolev norms are comparable") {
  for (double s : {-0.6, 0.0, 0.4, 1.0}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const SpectralField f = random_field(12, seed, 1.2);
      const double b = norm(f, NormSpec::besov(s, 2.0, 2.0));
      const double h = norm(f, NormSpec::sobolev(s));
      const double C = std::pow(2.0, std::fabs(s) + 1.0);
      CHECK(b / h <= C);
      CHECK(h / b <= C);
    }
  }
}

TEST_CASE("binary field dump") {
  const SpectralField f = random_field(3, 77);
  std::stringstream ss;
  write_field(ss, f);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "WNLW");
  CHECK(bytes.size() == 16 + 16 * f.size());
  const SpectralField g = read_field(ss);
  CHECK(g.box() == f.box());
  CHECK(max_abs_diff(f, g) == 0.0);

  TrajectoryDump t{{0.0, 0.5}, {f, 2.0 * f}, {f, f}};
  std::stringstream ts;
  write_trajectory(ts, t);
  const TrajectoryDump u = read_trajectory(ts);
  REQUIRE(u.times.size() == 2);
  CHECK(u.times[1] == 0.5);
  CHECK(max_abs_diff(u.position[1], 2.0 * f) == 0.0);
}
