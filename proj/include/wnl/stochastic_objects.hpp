#pragma once

// Stochastic objects built from one Gaussian draw: the free wave z1, its Wick
// powers Z2 = z1^2 - sigma and Z3 = z1^3 - 3 sigma z1, the second iterate
// z2 = -L^{-1} Z3 and the quintic term Z5 = Z2 z2, plus Monte Carlo
// estimators and closed-form variances.
//
// The mass a selects L = d_t^2 - Delta + a: a = 1 for the renormalized
// problem, a = C_N for the modified data. Frequencies are w_n = sqrt(a + |n|^2).

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <wnl/random_data.hpp>
#include <wnl/renormalization.hpp>
#include <wnl/spectral_core.hpp>

namespace wnl {

inline double kg_frequency(int norm_sq, double mass) noexcept { return std::sqrt(mass + double(norm_sq)); }

/// z1(t) = sum (cos(t w) g_n + sin(t w) h_n) / (w <n>^{alpha-1}) e^{in.x}, |n| <= N.
SpectralField z1_at(const GaussianDraw& draw, int N, double alpha, double t, double mass = 1.0);
/// d/dt z1(t).
SpectralField z1_velocity_at(const GaussianDraw& draw, int N, double alpha, double t, double mass = 1.0);

/// z^2 - sigma on |n| <= 2N, exact.
SpectralField wick_square(const SpectralField& z, double sigma);
/// z^3 - 3 sigma z on |n| <= 3N, exact.
SpectralField wick_cube(const SpectralField& z, double sigma);
/// P_K (z^3 - 3 sigma z), exact on |n| <= K.
SpectralField wick_cube_projected(const SpectralField& z, double sigma, int out_cutoff);

/// Trapezoid Duhamel integral u(t) = int_0^t sin((t-s) w)/w F(s) ds per mode,
/// accumulated on uniform nodes s_k = k h (h may be negative). Feed node
/// values in order with push(); value()/velocity() give u and du/dt at the
/// last node, value_at() at an intermediate time.
class TrapezoidDuhamel {
 public:
  TrapezoidDuhamel(FrequencyBox box, double mass, double step);

  double step() const noexcept { return h_; }
  std::size_t nodes() const noexcept { return count_; }
  double last_time() const noexcept { return (count_ ? double(count_ - 1) : 0.0) * h_; }

  /// Adds F at node time (nodes() * step).
  void push(const SpectralField& F);
  SpectralField value() const;
  SpectralField velocity() const;
  /// u at time t between the last node and the next one, given F(t).
  SpectralField value_at(double t, const SpectralField& F_t) const;

 private:
  FrequencyBox box_;
  double mass_, h_;
  std::size_t count_ = 0;
  std::vector<double> omega_;
  std::vector<Complex> C_, S_;    // int cos(s w) F, int sin(s w) F up to the last node
  std::vector<Complex> last_F_;
};

/// z2 = -L^{-1} P_N Z3 at each requested time, Z3 evaluated in closed form at
/// the quadrature nodes. Times may have either sign; a time that is not a
/// node gets a final shortened trapezoid panel.
std::vector<SpectralField> z2_trajectory(const GaussianDraw& draw, int N, double alpha,
                                         std::span<const double> times, double mass, double sigma,
                                         double quadrature_dt);

struct Z5Split {
  SpectralField low, resonant, high, total;
};

/// Paraproduct pieces of Z2 z2 projected to |n| <= out_cutoff (default: z2's cutoff).
Z5Split z5_at(const SpectralField& Z2, const SpectralField& z2, int out_cutoff = -1);

/// Objects at one time. Cutoffs: z1, z2, z2_dot, Z3, Z5 at N; Z2 at 2N.
/// Z3 and Z5 are the projections the solver consumes.
struct EnhancedSample {
  double t = 0;
  SpectralField z1, z1_dot, Z2, Z3, z2, z2_dot, Z5;
};

/// Streams enhanced samples forward in time on nodes k * dt_q, k >= 0.
class EnhancedSource {
 public:
  EnhancedSource(const GaussianDraw& draw, int N, double alpha, double mass, double sigma, double dt_q);

  int cutoff() const noexcept { return N_; }
  double sigma() const noexcept { return sigma_; }
  double mass() const noexcept { return mass_; }
  double step() const noexcept { return dt_q_; }

  /// Sample at node time t (t must be a node, nondecreasing across calls).
  const EnhancedSample& at(double t);

 private:
  void advance();  // pushes the next node
  EnhancedSample make_sample(double t) const;

  const GaussianDraw* draw_;
  int N_;
  double alpha_, mass_, sigma_, dt_q_;
  TrapezoidDuhamel duhamel_;
  std::optional<EnhancedSample> current_;
  long next_node_ = 0;
};

struct EnhancedDataSet {
  std::vector<double> time_grid;
  std::vector<SpectralField> z1, Z2, Z3, z2, Z5, Z5_low, Z5_res, Z5_high;
  RenormConstants renorm;
  double mass = 1.0;
  double sigma = 0.0;
};

/// Materializes the objects at the given nonnegative node times (multiples of dt_q).
EnhancedDataSet build_enhanced(const GaussianDraw& draw, int N, double alpha, double mass, double sigma,
                               std::span<const double> times, double dt_q, bool with_split = true);

// ------------------------------------------------------- closed-form variances

/// Pointwise variance of Z_{j,M} - Z_{j,N}, j in {1, 2, 3}.
double exact_diff_variance(int j, double alpha, int N, int M);

// ---------------------------------------------------------- Monte Carlo tools

/// z1 at a point for several nested cutoffs of the same draw (levels ascending).
/// Uses only the coefficients, not a materialized field.
class PointSampler {
 public:
  PointSampler(std::vector<int> levels, double alpha, double t, const Point& x, double mass = 1.0);
  /// Values z1_{levels[k]}(t, x) for the draw with this master seed.
  std::vector<double> sample(std::uint64_t master_seed) const;

 private:
  struct Term {
    Mode n;      // Lambda representative (n != 0 unless zero mode)
    int level;   // first level that contains n
    Complex cg, ch;  // e^{in.x} cos(t w)/amp, e^{in.x} sin(t w)/amp
    bool zero;
  };
  std::vector<int> levels_;
  std::vector<Term> terms_;
};

enum class ObjectSelector { z1, Z2, Z3 };
std::string to_string(ObjectSelector s);

struct Estimate {
  double value = 0;
  double stderr_ = 0;
};

/// ||X||_{L^p(Omega)} / ||X||_{L^2(Omega)} at the point (t, x) = (0.3, 0) with
/// the delta-method standard error.
Estimate moment_ratio(ObjectSelector sel, int p, int sample_count, std::uint64_t seed, double alpha = 1.4,
                      int N = 8);

struct ContinuityRow {
  double h = 0;
  double mean = 0;
  double stderr_ = 0;
};

struct ContinuityTable {
  std::vector<ContinuityRow> rows;
  double slope = 0;  // least-squares slope of log mean vs log h over h > 0
};

/// E ||Z_j(t + h) - Z_j(t)|| over seeds seed..seed+sample_count-1.
ContinuityTable modulus_of_continuity(ObjectSelector sel, double t, std::span<const double> h_ladder,
                                      const NormSpec& spec, int sample_count, std::uint64_t seed,
                                      double alpha = 1.4, int N = 8);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace wnl
