#include <wnl/spectral_core.hpp>
#include <wnl/simd_kernels.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <numeric>

#include "fft_engine.hpp"

namespace wnl {

namespace detail {

struct ModeTable {
  int cutoff = 0;
  std::vector<Mode> modes;
  std::vector<int> norms_sq;
  std::vector<std::int32_t> lookup;  // dense (2N+1)^3 cube, -1 outside the ball

  std::size_t cube_index(const Mode& n) const noexcept {
    const std::size_t side = 2 * std::size_t(cutoff) + 1;
    return ((std::size_t(n[0] + cutoff) * side) + std::size_t(n[1] + cutoff)) * side +
           std::size_t(n[2] + cutoff);
  }
};

namespace {

std::shared_ptr<const ModeTable> build_table(int N) {
  auto t = std::make_shared<ModeTable>();
  t->cutoff = N;
  const std::size_t side = 2 * std::size_t(N) + 1;
  t->lookup.assign(side * side * side, -1);
  const int N2 = N * N;
  for (int a = -N; a <= N; ++a)
    for (int b = -N; b <= N; ++b)
      for (int c = -N; c <= N; ++c) {
        const int r2 = a * a + b * b + c * c;
        if (r2 > N2) continue;
        const Mode n{a, b, c};
        t->lookup[t->cube_index(n)] = std::int32_t(t->modes.size());
        t->modes.push_back(n);
        t->norms_sq.push_back(r2);
      }
  return t;
}

std::shared_ptr<const ModeTable> table_for(int N) {
  static std::mutex m;
  static std::map<int, std::shared_ptr<const ModeTable>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& slot = cache[N];
  if (!slot) slot = build_table(N);
  return slot;
}

}  // namespace
}  // namespace detail

int fft_friendly_size(int n) {
  if (n < 1) n = 1;
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

int default_grid_size(int cutoff) { return fft_friendly_size(3 * cutoff + 1); }

int product_grid_size(std::span<const int> input_cutoffs, int out_cutoff) {
  int sum = 0;
  int mx = out_cutoff;
  for (int c : input_cutoffs) {
    sum += c;
    mx = std::max(mx, c);
  }
  return fft_friendly_size(std::max(sum + out_cutoff + 1, 2 * mx + 1));
}

// ---------------------------------------------------------------- FrequencyBox

FrequencyBox::FrequencyBox() : FrequencyBox(0) {}

FrequencyBox::FrequencyBox(int cutoff) : FrequencyBox(cutoff, default_grid_size(cutoff)) {}

FrequencyBox::FrequencyBox(int cutoff, int grid_size) : cutoff_(cutoff), grid_size_(grid_size) {
  if (cutoff < 0) throw std::invalid_argument("FrequencyBox: negative cutoff");
  if (grid_size < 2 * cutoff + 1)
    throw std::invalid_argument("FrequencyBox: grid size below 2N+1");
  table_ = detail::table_for(cutoff);
}

std::size_t FrequencyBox::size() const noexcept { return table_->modes.size(); }
const Mode& FrequencyBox::mode(std::size_t index) const { return table_->modes.at(index); }
int FrequencyBox::norm_sq(std::size_t index) const { return table_->norms_sq.at(index); }
std::span<const Mode> FrequencyBox::modes() const noexcept { return table_->modes; }
std::span<const int> FrequencyBox::norms_sq() const noexcept { return table_->norms_sq; }

std::optional<std::size_t> FrequencyBox::find(const Mode& n) const noexcept {
  for (int c : n)
    if (c < -cutoff_ || c > cutoff_) return std::nullopt;
  const std::int32_t i = table_->lookup[table_->cube_index(n)];
  if (i < 0) return std::nullopt;
  return std::size_t(i);
}

std::size_t FrequencyBox::index_of(const Mode& n) const {
  auto i = find(n);
  if (!i) throw std::out_of_range("mode outside frequency box");
  return *i;
}

// --------------------------------------------------------------- SpectralField

SpectralField::SpectralField(FrequencyBox box) : box_(std::move(box)), coeffs_(box_.size()) {}

SpectralField::SpectralField(FrequencyBox box, std::vector<Complex> coefficients)
    : box_(std::move(box)), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != box_.size())
    throw std::invalid_argument("SpectralField: coefficient count does not match box");
}

Complex SpectralField::at(const Mode& n) const noexcept {
  auto i = box_.find(n);
  return i ? coeffs_[*i] : Complex{};
}

void SpectralField::set_pair(const Mode& n, Complex value) {
  const std::size_t i = box_.index_of(n);
  const std::size_t j = box_.negated(i);
  if (i == j) {
    coeffs_[i] = value.real();
  } else {
    coeffs_[i] = value;
    coeffs_[j] = std::conj(value);
  }
}

bool SpectralField::is_hermitian(double rel_tol) const noexcept {
  double scale = 0.0;
  for (const auto& c : coeffs_) scale = std::max(scale, std::abs(c));
  const double tol = rel_tol * std::max(scale, 1e-300);
  const std::size_t n = coeffs_.size();
  for (std::size_t i = 0; i <= n / 2; ++i)
    if (std::abs(coeffs_[i] - std::conj(coeffs_[n - 1 - i])) > tol) return false;
  return true;
}

void SpectralField::symmetrize() noexcept {
  const std::size_t n = coeffs_.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const Complex a = 0.5 * (coeffs_[i] + std::conj(coeffs_[n - 1 - i]));
    coeffs_[i] = a;
    coeffs_[n - 1 - i] = std::conj(a);
  }
  if (n) coeffs_[n / 2] = coeffs_[n / 2].real();
}

SpectralField SpectralField::resized(int cutoff) const { return resized(FrequencyBox(cutoff)); }

SpectralField SpectralField::resized(const FrequencyBox& box) const {
  SpectralField out(box);
  const auto modes = box.modes();
  if (box.cutoff() <= cutoff()) {
    for (std::size_t i = 0; i < modes.size(); ++i) out.coeffs_[i] = coeffs_[box_.index_of(modes[i])];
  } else {
    const auto mine = box_.modes();
    for (std::size_t i = 0; i < mine.size(); ++i) out.coeffs_[box.index_of(mine[i])] = coeffs_[i];
  }
  return out;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (other.cutoff() != cutoff()) throw std::invalid_argument("SpectralField: box mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (other.cutoff() != cutoff()) throw std::invalid_argument("SpectralField: box mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double scale) noexcept {
  for (auto& c : coeffs_) c *= scale;
  return *this;
}

void SpectralField::add_scaled(const SpectralField& other, double scale) {
  if (other.cutoff() != cutoff()) throw std::invalid_argument("SpectralField: box mismatch");
  simd::active().axpy(scale, reinterpret_cast<const double*>(other.coeffs_.data()),
                      reinterpret_cast<double*>(coeffs_.data()), 2 * coeffs_.size());
}

// ------------------------------------------------------------------ transforms

double bracket(const Mode& n) noexcept {
  return std::sqrt(1.0 + double(n[0]) * n[0] + double(n[1]) * n[1] + double(n[2]) * n[2]);
}

double bracket_from_norm_sq(int norm_sq) noexcept { return std::sqrt(1.0 + double(norm_sq)); }

GridField to_grid(const SpectralField& f) { return to_grid(f, f.box().grid_size()); }

GridField to_grid(const SpectralField& f, int grid_size) {
  GridField g;
  g.grid_size = grid_size;
  g.cutoff = f.cutoff();
  to_grid_into(f, g);
  return g;
}

void to_grid_into(const SpectralField& f, GridField& out) {
  const int M = out.grid_size;
  if (M < 2 * f.cutoff() + 1) throw std::invalid_argument("to_grid: grid too small for cutoff");
  if (!f.is_hermitian(1e-9)) throw std::invalid_argument("to_grid: field is not Hermitian");
  out.cutoff = f.cutoff();
  fft::Workspace& ws = fft::workspace(M);
  std::fill(ws.half, ws.half + ws.half_size(), Complex{});
  const auto modes = f.box().modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const Mode& n = modes[i];
    if (n[2] < 0) continue;
    ws.half[ws.half_index(n[0], n[1], n[2])] = f[i];
  }
  fft::inverse_ball(ws, f.cutoff());
  out.values.assign(ws.real, ws.real + ws.real_size());
}

SpectralField to_spectral(const GridField& g, int cutoff) { return to_spectral(g, FrequencyBox(cutoff)); }

SpectralField to_spectral(const GridField& g, const FrequencyBox& box) {
  const int M = g.grid_size;
  if (M < 2 * box.cutoff() + 1) throw std::invalid_argument("to_spectral: cutoff exceeds grid capacity");
  if (g.values.size() != std::size_t(M) * M * M) throw std::invalid_argument("to_spectral: bad grid");
  fft::Workspace& ws = fft::workspace(M);
  std::copy(g.values.begin(), g.values.end(), ws.real);
  fft::forward_ball(ws, box.cutoff());
  const double inv = 1.0 / (double(M) * M * M);
  SpectralField f(box);
  const auto modes = box.modes();
  const std::size_t n = modes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Mode& m = modes[i];
    if (m[2] > 0) {
      const Complex c = ws.half[ws.half_index(m[0], m[1], m[2])] * inv;
      f[i] = c;
      f[n - 1 - i] = std::conj(c);
    } else if (m[2] == 0 && i <= n - 1 - i) {
      const Complex a = ws.half[ws.half_index(m[0], m[1], 0)];
      const Complex b = ws.half[ws.half_index(-m[0], -m[1], 0)];
      const Complex c = 0.5 * (a + std::conj(b)) * inv;
      f[i] = c;
      f[n - 1 - i] = std::conj(c);
    }
  }
  f[box.zero_index()] = f[box.zero_index()].real();
  return f;
}

double point_value(const SpectralField& f, const Point& x) {
  const int N = f.cutoff();
  std::array<std::vector<Complex>, 3> ph;
  for (int d = 0; d < 3; ++d) {
    ph[d].resize(2 * N + 1);
    for (int k = -N; k <= N; ++k) ph[d][k + N] = std::polar(1.0, k * x[d]);
  }
  const auto modes = f.box().modes();
  double acc = 0.0;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const Mode& n = modes[i];
    acc += (f[i] * ph[0][n[0] + N] * ph[1][n[1] + N] * ph[2][n[2] + N]).real();
  }
  return acc;
}

SpectralField apply_bessel(const SpectralField& f, double s) {
  if (s == 0.0) return f;
  SpectralField out = f;
  const auto r2 = f.box().norms_sq();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= std::pow(1.0 + r2[i], 0.5 * s);
  return out;
}

// ------------------------------------------------------------- Littlewood-Paley

int lp_block_index(int norm_sq) noexcept {
  if (norm_sq <= 1) return 0;
  int j = 1;
  while ((1LL << (2 * j)) < norm_sq) ++j;  // smallest j with |n| <= 2^j
  return j;
}

int lp_block_count(int cutoff) noexcept { return lp_block_index(cutoff * cutoff) + 1; }

SpectralField lp_block(const SpectralField& f, int j) {
  SpectralField out(f.box());
  const auto r2 = f.box().norms_sq();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (lp_block_index(r2[i]) == j) out[i] = f[i];
  return out;
}

// -------------------------------------------------------------------- products

SpectralField dealiased_product(const SpectralField& f, const SpectralField& g, int out_cutoff) {
  const int cut[2] = {f.cutoff(), g.cutoff()};
  const int M = product_grid_size(cut, out_cutoff);
  GridField a = to_grid(f, M);
  const GridField b = to_grid(g, M);
  simd::active().multiply(a.values.data(), b.values.data(), a.values.data(), a.size());
  return to_spectral(a, out_cutoff);
}

SpectralField dealiased_product(const SpectralField& f, const SpectralField& g) {
  return dealiased_product(f, g, f.cutoff() + g.cutoff());
}

ParaproductSplit paraproduct_split(const SpectralField& f, const SpectralField& g, int out_cutoff, int grid_size) {
  if (f.cutoff() != g.cutoff()) throw std::invalid_argument("paraproduct_split: box mismatch");
  if (out_cutoff < 0) out_cutoff = f.cutoff() + g.cutoff();
  const int cut[2] = {f.cutoff(), g.cutoff()};
  const int M = grid_size > 0 ? grid_size : product_grid_size(cut, out_cutoff);
  const int B = lp_block_count(f.cutoff());

  // Block j lives in |n| <= 2^j, so it is transformed from the smaller box.
  // Blocks that vanish identically are skipped.
  auto block_grid = [&](const SpectralField& h, int j) -> std::optional<GridField> {
    const SpectralField b = lp_block(h, j);
    bool any = false;
    for (const Complex& c : b.coefficients()) any = any || c != Complex{};
    if (!any) return std::nullopt;
    const int cj = std::min(h.cutoff(), 1 << j);
    return to_grid(cj == h.cutoff() ? b : b.resized(cj), M);
  };
  std::vector<std::optional<GridField>> fb(B), gb(B);
  for (int j = 0; j < B; ++j) {
    fb[j] = block_grid(f, j);
    gb[j] = block_grid(g, j);
  }
  const std::size_t n = std::size_t(M) * M * M;
  GridField low{M, out_cutoff, std::vector<double>(n)};
  GridField res = low, high = low;
  for (int j = 0; j < B; ++j)
    for (int k = 0; k < B; ++k) {
      if (!fb[j] || !gb[k]) continue;
      GridField& dst = (j < k - 2) ? low : (k < j - 2) ? high : res;
      const double* a = fb[j]->values.data();
      const double* b = gb[k]->values.data();
      double* d = dst.values.data();
      for (std::size_t i = 0; i < n; ++i) d[i] += a[i] * b[i];
    }
  return {to_spectral(low, out_cutoff), to_spectral(res, out_cutoff), to_spectral(high, out_cutoff)};
}

// ----------------------------------------------------------------------- norms

double sobolev_norm_sq(const SpectralField& f, double s) {
  const auto r2 = f.box().norms_sq();
  std::vector<double> w(f.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(1.0 + r2[i], s);
  return kTorusVolume * simd::active().weighted_sum_sq(f.coefficients().data(), w.data(), w.size());
}

double grid_lp_norm(const GridField& g, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("grid_lp_norm: p must be >= 1");
  const auto& k = simd::active();
  if (std::isinf(p)) return k.max_abs(g.values.data(), g.size());
  double acc = 0.0;
  if (p == 4.0) {
    acc = k.sum_pow4(g.values.data(), g.size());
  } else if (p == 2.0) {
    for (double v : g.values) acc += v * v;
  } else {
    for (double v : g.values) acc += std::pow(std::fabs(v), p);
  }
  return std::pow(acc * g.cell_volume(), 1.0 / p);
}

namespace {

// Equal-weight quadrature is exact for |f|^p, p in {2, 4}, once M > 4N.
int norm_grid_size(int cutoff) { return fft_friendly_size(4 * cutoff + 1); }

double spatial_norm(const SpectralField& f, double s, double p) {
  if (p == 2.0) return std::sqrt(sobolev_norm_sq(f, s));
  return grid_lp_norm(to_grid(apply_bessel(f, s), norm_grid_size(f.cutoff())), p);
}

void check_spec(const NormSpec& spec) {
  if (!(spec.p >= 1.0) || !(spec.q >= 1.0)) throw std::invalid_argument("norm: p, q must lie in [1, inf]");
}

}  // namespace

double norm(const SpectralField& f, const NormSpec& spec) {
  check_spec(spec);
  switch (spec.kind) {
    case NormKind::SobolevWsp:
      return spatial_norm(f, spec.s, spec.p);
    case NormKind::SupW_s_inf:
      return spatial_norm(f, spec.s, kInf);
    case NormKind::BesovBspq: {
      const int B = lp_block_count(f.cutoff());
      std::vector<double> terms(B);
      for (int j = 0; j < B; ++j)
        terms[j] = std::pow(2.0, spec.s * j) * spatial_norm(lp_block(f, j), 0.0, spec.p);
      if (std::isinf(spec.q)) return *std::max_element(terms.begin(), terms.end());
      double acc = 0.0;
      for (double t : terms) acc += std::pow(t, spec.q);
      return std::pow(acc, 1.0 / spec.q);
    }
  }
  throw std::invalid_argument("norm: unsupported spec");
}

double norm(const GridField& g, const NormSpec& spec) {
  check_spec(spec);
  if (spec.kind != NormKind::BesovBspq && spec.s == 0.0)
    return grid_lp_norm(g, spec.kind == NormKind::SupW_s_inf ? kInf : spec.p);
  return norm(to_spectral(g, g.cutoff), spec);
}

}  // namespace wnl
