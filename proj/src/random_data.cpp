#include <wnl/philox.hpp>
#include <wnl/random_data.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace wnl {

bool in_lambda(const Mode& n) noexcept {
  if (n[2] != 0) return n[2] > 0;
  if (n[1] != 0) return n[1] > 0;
  return n[0] >= 0;
}

Complex gaussian_coefficient(std::uint64_t master_seed, const Mode& n, GaussStream stream) noexcept {
  const bool own = in_lambda(n);
  const Mode m = own ? n : Mode{-n[0], -n[1], -n[2]};
  const PhiloxCounter ctr{std::uint32_t(m[0]), std::uint32_t(m[1]), std::uint32_t(m[2]),
                          std::uint32_t(stream)};
  const auto z = philox_normal_pair(ctr, philox_key(master_seed));
  if (m == Mode{0, 0, 0}) return z[0];
  const Complex c = Complex(z[0], z[1]) * std::sqrt(0.5);
  return own ? c : std::conj(c);
}

GaussianDraw GaussianDraw::zeros(int n_max) {
  const FrequencyBox box(n_max);
  return {0, n_max, SpectralField(box), SpectralField(box)};
}

GaussianDraw GaussianDraw::from_coefficients(SpectralField g, SpectralField h) {
  if (g.cutoff() != h.cutoff()) throw std::invalid_argument("GaussianDraw: g and h boxes differ");
  const int n = g.cutoff();
  return {0, n, std::move(g), std::move(h)};
}

GaussianDraw sample_draw(std::uint64_t master_seed, int n_max) {
  if (n_max < 0) throw std::invalid_argument("sample_draw: negative N_max");
  const FrequencyBox box(n_max);
  GaussianDraw d{master_seed, n_max, SpectralField(box), SpectralField(box)};
  const auto modes = box.modes();
  const std::size_t n = modes.size();
  for (std::size_t i = n / 2; i < n; ++i) {  // one representative per conjugate pair
    const Complex g = gaussian_coefficient(master_seed, modes[i], GaussStream::G);
    const Complex h = gaussian_coefficient(master_seed, modes[i], GaussStream::H);
    d.g[i] = g;
    d.h[i] = h;
    d.g[n - 1 - i] = std::conj(g);
    d.h[n - 1 - i] = std::conj(h);
  }
  return d;
}

Complex rotated_gauss(const GaussianDraw& draw, const Mode& n, double t, double bracket_value) {
  if (!(bracket_value > 0)) throw std::invalid_argument("rotated_gauss: bracket must be positive");
  return std::cos(t * bracket_value) * draw.g.at(n) + std::sin(t * bracket_value) * draw.h.at(n);
}

bool alpha_in_range(double alpha) noexcept { return alpha > 1.0 && alpha <= 1.5; }

namespace {

void warn_alpha(double alpha) {
  static std::atomic<bool> warned{false};
  if (!alpha_in_range(alpha) && !warned.exchange(true))
    std::fprintf(stderr, "warning: alpha = %g outside (1, 3/2]\n", alpha);
}

InitialData build(const GaussianDraw& draw, int N, double alpha, double mass) {
  if (N > draw.n_max) throw std::invalid_argument("initial data: N exceeds the draw's N_max");
  warn_alpha(alpha);
  const FrequencyBox box(N);
  InitialData d{SpectralField(box), SpectralField(box)};
  const auto modes = box.modes();
  const auto r2 = box.norms_sq();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double b = bracket_from_norm_sq(r2[i]);
    const double low = std::pow(b, alpha - 1.0);
    const std::size_t j = draw.g.box().index_of(modes[i]);
    d.position[i] = draw.g[j] / (std::sqrt(mass + r2[i]) * low);
    d.velocity[i] = draw.h[j] / low;
  }
  return d;
}

}  // namespace

InitialData truncated_data(const GaussianDraw& draw, int N, double alpha) {
  return build(draw, N, alpha, 1.0);
}

InitialData modified_data(const GaussianDraw& draw, int N, double alpha, double C_N) {
  if (!(C_N >= 1.0)) throw std::invalid_argument("modified_data: C_N must be >= 1");
  return build(draw, N, alpha, C_N);
}

}  // namespace wnl
