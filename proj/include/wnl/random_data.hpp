#pragma once

// Gaussian coefficient families {g_n, h_n} and the random initial data built
// from them.
//
// Independent coefficients live on the half lattice
//   Lambda = {n3 > 0} u {n3 = 0, n2 > 0} u {n3 = n2 = 0, n1 > 0} u {0};
// the rest is filled by conjugation. Each coefficient is drawn from a Philox
// block addressed by (master seed, mode, stream), so the value at a mode does
// not depend on the truncation level.

#include <cstdint>

#include <wnl/spectral_core.hpp>

namespace wnl {

enum class GaussStream : std::uint32_t { G = 0, H = 1 };

bool in_lambda(const Mode& n) noexcept;

/// The coefficient of one family at mode n, without materializing a draw.
/// Complex with independent N(0, 1/2) parts for n != 0, real N(0, 1) at 0.
Complex gaussian_coefficient(std::uint64_t master_seed, const Mode& n, GaussStream stream) noexcept;

struct GaussianDraw {
  std::uint64_t master_seed = 0;
  int n_max = 0;
  SpectralField g;
  SpectralField h;

  /// All coefficients zero (degenerate "no noise" draw).
  static GaussianDraw zeros(int n_max);
  static GaussianDraw from_coefficients(SpectralField g, SpectralField h);
};

GaussianDraw sample_draw(std::uint64_t master_seed, int n_max);

/// cos(t b) g_n + sin(t b) h_n.
Complex rotated_gauss(const GaussianDraw& draw, const Mode& n, double t, double bracket_value);

struct InitialData {
  SpectralField position;
  SpectralField velocity;
};

/// True for 1 < alpha <= 3/2; other values are accepted with a warning.
bool alpha_in_range(double alpha) noexcept;

/// (g_n / <n>^alpha, h_n / <n>^{alpha-1}) on |n| <= N.
InitialData truncated_data(const GaussianDraw& draw, int N, double alpha);

/// (g_n / (<n>_N <n>^{alpha-1}), h_n / <n>^{alpha-1}) with <n>_N = sqrt(C_N + |n|^2).
InitialData modified_data(const GaussianDraw& draw, int N, double alpha, double C_N);

}  // namespace wnl
