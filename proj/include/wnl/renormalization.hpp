#pragma once

// Renormalization constants: sigma_N, alpha_N = 3 sigma_N - 1, the implicit
// mass C_N and R_N = C_N - 3 sigma_N. Lattice sums run over shells |n|^2 = k
// with their multiplicities, accumulated with compensated summation.

#include <cstdint>
#include <span>
#include <vector>

namespace wnl {

struct Shell {
  int norm_sq;
  std::int64_t multiplicity;
};

/// Shells of the ball |n| <= N in increasing |n|^2 (empty shells omitted).
std::span<const Shell> lattice_shells(int N);

class KahanSum {
 public:
  void add(double x) noexcept {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const noexcept { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/// sum_{|n| <= N} <n>^{-2 alpha}
double sigma_exact(double alpha, int N);

/// sum_{|n| <= N} 1 / ((a + |n|^2) <n>^{2(alpha-1)}): pointwise variance of
/// the free wave of mass a started from (g/(sqrt(a+|n|^2)<n>^{alpha-1}), h/<n>^{alpha-1}).
double sigma_mass(double alpha, int N, double mass);

/// Pointwise variance at time t of the mass-1 free wave started from the
/// modified data (g/(<n>_N <n>^{alpha-1}), h/<n>^{alpha-1}):
///   sum cos^2(t<n>) / ((C + |n|^2) <n>^{2alpha-2}) + sin^2(t<n>) / <n>^{2alpha}.
double modified_variance(double alpha, int N, double C_N, double t);

struct RenormConstants {
  double alpha = 1.5;
  int N = 0;
  double sigma_N = 1.0;
  double alpha_N = 2.0;
  double C_N = 1.0;
  double R_N = 0.0;
  double residual = 0.0;  // |C - 3 sum(...)| / C at the returned root
};

/// Unique root C >= 1 of C = 3 sum 1/((C + |n|^2) <n>^{2(alpha-1)}).
RenormConstants solve_CN(double alpha, int N);

struct AsymptoticRow {
  int N = 0;
  double sigma_N = 0;
  double C_N = 0;
  double R_N = 0;
  double rel_R = 0;          // |R_N| / sigma_N
  double sigma_ratio = 0;    // sigma_{2N} / sigma_N (NaN when 2N is not on the ladder)
  double ratio_reference = 0;  // 2^{3 - 2 alpha}
};

std::vector<AsymptoticRow> asymptotic_report(double alpha, std::span<const int> ladder);

}  // namespace wnl
