#pragma once

// Frequency lattice, Hermitian spectral fields on T^3 = (R/2piZ)^3, grid
// transforms, dealiased products, Littlewood-Paley blocks, paraproducts and
// Sobolev / Besov / sup norms.
//
// Convention: f(x) = sum_n fhat(n) e^{i n.x}, |e^{i n.x}|_{L^2}^2 = (2pi)^3.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wnl {

using Complex = std::complex<double>;
using Mode = std::array<int, 3>;
using Point = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTorusVolume = 8.0 * kPi * kPi * kPi;  // (2pi)^3
inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {
struct ModeTable;
}

/// Smallest integer >= n whose prime factors are all in {2, 3, 5, 7}.
int fft_friendly_size(int n);

/// Default grid for a box of cutoff N: smallest FFT-friendly M >= 3N + 1.
int default_grid_size(int cutoff);

/// Grid size that makes the product of fields with the given cutoffs exact on
/// every retained output mode |n| <= out_cutoff (per-axis aliasing bound).
int product_grid_size(std::span<const int> input_cutoffs, int out_cutoff);

/// All n in Z^3 with |n| <= N, enumerated in lexicographic order, plus the
/// grid size M used when the box is sampled on a uniform grid.
class FrequencyBox {
 public:
  FrequencyBox();
  explicit FrequencyBox(int cutoff);
  FrequencyBox(int cutoff, int grid_size);

  int cutoff() const noexcept { return cutoff_; }
  int grid_size() const noexcept { return grid_size_; }
  std::size_t size() const noexcept;

  const Mode& mode(std::size_t index) const;
  int norm_sq(std::size_t index) const;
  std::span<const Mode> modes() const noexcept;
  std::span<const int> norms_sq() const noexcept;

  /// Index of n, or nullopt if |n| > N.
  std::optional<std::size_t> find(const Mode& n) const noexcept;
  std::size_t index_of(const Mode& n) const;  // throws if outside
  /// Index of -n. The mode list is symmetric, so negation reverses the order.
  std::size_t negated(std::size_t index) const noexcept { return size() - 1 - index; }
  std::size_t zero_index() const noexcept { return (size() - 1) / 2; }

  bool operator==(const FrequencyBox& other) const noexcept {
    return cutoff_ == other.cutoff_ && grid_size_ == other.grid_size_;
  }

 private:
  int cutoff_ = 0;
  int grid_size_ = 1;
  std::shared_ptr<const detail::ModeTable> table_;
};

/// Hermitian-symmetric Fourier coefficients on a FrequencyBox.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(FrequencyBox box);
  SpectralField(FrequencyBox box, std::vector<Complex> coefficients);

  const FrequencyBox& box() const noexcept { return box_; }
  int cutoff() const noexcept { return box_.cutoff(); }
  std::size_t size() const noexcept { return coeffs_.size(); }

  std::span<Complex> coefficients() noexcept { return coeffs_; }
  std::span<const Complex> coefficients() const noexcept { return coeffs_; }
  Complex& operator[](std::size_t i) { return coeffs_[i]; }
  const Complex& operator[](std::size_t i) const { return coeffs_[i]; }

  /// Coefficient of mode n; zero outside the box.
  Complex at(const Mode& n) const noexcept;
  /// Sets the coefficient of n and the conjugate at -n.
  void set_pair(const Mode& n, Complex value);

  bool is_hermitian(double rel_tol = 1e-12) const noexcept;
  /// Projects onto the Hermitian subspace: c(n) <- (c(n) + conj c(-n)) / 2.
  void symmetrize() noexcept;

  /// Restriction (or zero extension) to a box of another cutoff.
  SpectralField resized(int cutoff) const;
  SpectralField resized(const FrequencyBox& box) const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double scale) noexcept;
  /// this += scale * other (boxes must match).
  void add_scaled(const SpectralField& other, double scale);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

 private:
  FrequencyBox box_;
  std::vector<Complex> coeffs_;
};

/// Real samples on the uniform M^3 grid x_j = 2pi j / M, stored with the last
/// axis fastest. `cutoff` records the band limit of the field it came from.
struct GridField {
  int grid_size = 0;
  int cutoff = 0;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double cell_volume() const noexcept {
    const double h = 2.0 * kPi / grid_size;
    return h * h * h;
  }
};

/// Japanese bracket <n> = sqrt(1 + |n|^2).
double bracket(const Mode& n) noexcept;
double bracket_from_norm_sq(int norm_sq) noexcept;

GridField to_grid(const SpectralField& f);
/// Samples f on an M^3 grid; M must be >= 2N + 1.
GridField to_grid(const SpectralField& f, int grid_size);
void to_grid_into(const SpectralField& f, GridField& out);
/// Coefficients of g for |n| <= cutoff; requires grid_size >= 2 cutoff + 1.
SpectralField to_spectral(const GridField& g, int cutoff);
SpectralField to_spectral(const GridField& g, const FrequencyBox& box);

/// Value of f at a point of T^3 by direct summation.
double point_value(const SpectralField& f, const Point& x);

/// Multiplies coefficient n by <n>^s.
SpectralField apply_bessel(const SpectralField& f, double s);

/// Littlewood-Paley block of a squared frequency: 0 for |n| <= 1, otherwise
/// the j with 2^{j-1} < |n| <= 2^j.
int lp_block_index(int norm_sq) noexcept;
/// Number of nonempty blocks for a cutoff.
int lp_block_count(int cutoff) noexcept;
SpectralField lp_block(const SpectralField& f, int j);

/// Exact discrete convolution restricted to |n| <= out_cutoff, computed on a
/// padded grid.
SpectralField dealiased_product(const SpectralField& f, const SpectralField& g, int out_cutoff);
SpectralField dealiased_product(const SpectralField& f, const SpectralField& g);

struct ParaproductSplit {
  SpectralField low;       // sum_{j < k-2} P_j f P_k g
  SpectralField resonant;  // sum_{|j-k| <= 2}
  SpectralField high;      // sum_{k < j-2}
  SpectralField total() const { return low + resonant + high; }
};

/// Bony decomposition of f g. Defaults to out_cutoff = N_f + N_g. grid_size 0 picks the
/// alias-free grid for the box cutoffs; callers that know the true supports may pass a smaller one.
ParaproductSplit paraproduct_split(const SpectralField& f, const SpectralField& g, int out_cutoff = -1,
                                   int grid_size = 0);

enum class NormKind { SobolevWsp, BesovBspq, SupW_s_inf };

struct NormSpec {
  NormKind kind = NormKind::SobolevWsp;
  double s = 0.0;
  double p = 2.0;
  double q = 2.0;

  static NormSpec sobolev(double s, double p = 2.0) { return {NormKind::SobolevWsp, s, p, 2.0}; }
  static NormSpec besov(double s, double p, double q) { return {NormKind::BesovBspq, s, p, q}; }
  static NormSpec sup(double s) { return {NormKind::SupW_s_inf, s, kInf, 2.0}; }
  static NormSpec lebesgue(double p) { return {NormKind::SobolevWsp, 0.0, p, 2.0}; }
};

/// L^p norm of grid samples with equal-weight quadrature; p = inf gives the
/// grid maximum.
double grid_lp_norm(const GridField& g, double p);

double norm(const SpectralField& f, const NormSpec& spec);
double norm(const GridField& g, const NormSpec& spec);

/// ||f||_{H^s}^2 = (2pi)^3 sum <n>^{2s} |fhat(n)|^2.
double sobolev_norm_sq(const SpectralField& f, double s);

}  // namespace wnl
