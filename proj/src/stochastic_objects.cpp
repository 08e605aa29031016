#include <wnl/simd_kernels.hpp>
#include <wnl/stochastic_objects.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wnl {

// ------------------------------------------------------------------------- z1

namespace {

SpectralField z1_impl(const GaussianDraw& draw, int N, double alpha, double t, double mass, bool velocity) {
  if (N > draw.n_max) throw std::invalid_argument("z1: N exceeds the draw's N_max");
  if (!(mass >= 1.0)) throw std::invalid_argument("z1: mass must be >= 1");
  const FrequencyBox box(N);
  SpectralField z(box);
  const auto modes = box.modes();
  const auto r2 = box.norms_sq();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double w = kg_frequency(r2[i], mass);
    const double amp = w * std::pow(1.0 + r2[i], 0.5 * (alpha - 1.0));
    const std::size_t j = draw.g.box().index_of(modes[i]);
    const double c = std::cos(t * w), s = std::sin(t * w);
    z[i] = velocity ? (w * (c * draw.h[j] - s * draw.g[j])) / amp : (c * draw.g[j] + s * draw.h[j]) / amp;
  }
  return z;
}

int cubic_grid(int N) { return fft_friendly_size(4 * N + 1); }

}  // namespace

SpectralField z1_at(const GaussianDraw& draw, int N, double alpha, double t, double mass) {
  return z1_impl(draw, N, alpha, t, mass, false);
}

SpectralField z1_velocity_at(const GaussianDraw& draw, int N, double alpha, double t, double mass) {
  return z1_impl(draw, N, alpha, t, mass, true);
}

// ---------------------------------------------------------------- Wick powers

SpectralField wick_square(const SpectralField& z, double sigma) {
  if (sigma < 0) throw std::invalid_argument("wick_square: negative sigma");
  SpectralField sq = dealiased_product(z, z, 2 * z.cutoff());
  sq[sq.box().zero_index()] -= sigma;
  return sq;
}

SpectralField wick_cube(const SpectralField& z, double sigma) {
  return wick_cube_projected(z, sigma, 3 * z.cutoff());
}

SpectralField wick_cube_projected(const SpectralField& z, double sigma, int out_cutoff) {
  if (sigma < 0) throw std::invalid_argument("wick_cube: negative sigma");
  const int N = z.cutoff();
  const int cut[3] = {N, N, N};
  const int M = product_grid_size(cut, out_cutoff);
  GridField g = to_grid(z, M);
  // z^3 - 3 sigma z pointwise; the linear term is exact on the grid as well.
  simd::active().cube_shift(g.values.data(), -3.0 * sigma, g.values.data(), g.size());
  return to_spectral(g, out_cutoff);
}

// ------------------------------------------------------------ Duhamel quadrature

TrapezoidDuhamel::TrapezoidDuhamel(FrequencyBox box, double mass, double step)
    : box_(std::move(box)), mass_(mass), h_(step) {
  if (!(mass >= 1.0)) throw std::invalid_argument("Duhamel: mass must be >= 1");
  if (step == 0.0 || !std::isfinite(step)) throw std::invalid_argument("Duhamel: bad step");
  const auto r2 = box_.norms_sq();
  omega_.resize(r2.size());
  for (std::size_t i = 0; i < r2.size(); ++i) omega_[i] = kg_frequency(r2[i], mass_);
  C_.assign(r2.size(), Complex{});
  S_.assign(r2.size(), Complex{});
}

void TrapezoidDuhamel::push(const SpectralField& F) {
  if (F.cutoff() != box_.cutoff()) throw std::invalid_argument("Duhamel: forcing box mismatch");
  const double s = double(count_) * h_;
  if (count_ > 0) {
    const double sp = s - h_;
    for (std::size_t i = 0; i < omega_.size(); ++i) {
      const double w = omega_[i];
      C_[i] += 0.5 * h_ * (std::cos(sp * w) * last_F_[i] + std::cos(s * w) * F[i]);
      S_[i] += 0.5 * h_ * (std::sin(sp * w) * last_F_[i] + std::sin(s * w) * F[i]);
    }
  }
  last_F_.assign(F.coefficients().begin(), F.coefficients().end());
  ++count_;
}

SpectralField TrapezoidDuhamel::value() const {
  const double t = last_time();
  SpectralField u(box_);
  for (std::size_t i = 0; i < omega_.size(); ++i) {
    const double w = omega_[i];
    u[i] = (std::sin(t * w) * C_[i] - std::cos(t * w) * S_[i]) / w;
  }
  return u;
}

SpectralField TrapezoidDuhamel::velocity() const {
  const double t = last_time();
  SpectralField u(box_);
  for (std::size_t i = 0; i < omega_.size(); ++i) {
    const double w = omega_[i];
    u[i] = std::cos(t * w) * C_[i] + std::sin(t * w) * S_[i];
  }
  return u;
}

SpectralField TrapezoidDuhamel::value_at(double t, const SpectralField& F_t) const {
  if (count_ == 0) throw std::logic_error("Duhamel: no nodes pushed");
  const double s = last_time();
  const double dh = t - s;
  SpectralField u(box_);
  for (std::size_t i = 0; i < omega_.size(); ++i) {
    const double w = omega_[i];
    const Complex C = C_[i] + 0.5 * dh * (std::cos(s * w) * last_F_[i] + std::cos(t * w) * F_t[i]);
    const Complex S = S_[i] + 0.5 * dh * (std::sin(s * w) * last_F_[i] + std::sin(t * w) * F_t[i]);
    u[i] = (std::sin(t * w) * C - std::cos(t * w) * S) / w;
  }
  return u;
}

// ------------------------------------------------------------------------- z2

std::vector<SpectralField> z2_trajectory(const GaussianDraw& draw, int N, double alpha,
                                         std::span<const double> times, double mass, double sigma,
                                         double quadrature_dt) {
  if (times.empty()) throw std::invalid_argument("z2_trajectory: empty time grid");
  if (!(quadrature_dt > 0)) throw std::invalid_argument("z2_trajectory: quadrature_dt must be positive");
  std::vector<SpectralField> out(times.size());
  auto forcing = [&](double t) {
    SpectralField F = wick_cube_projected(z1_at(draw, N, alpha, t, mass), sigma, N);
    F *= -1.0;
    return F;
  };
  for (int sign : {1, -1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < times.size(); ++i)
      if ((sign > 0 && times[i] >= 0) || (sign < 0 && times[i] < 0)) idx.push_back(i);
    if (idx.empty()) continue;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return std::fabs(times[a]) < std::fabs(times[b]); });
    TrapezoidDuhamel duh(FrequencyBox(N), mass, sign * quadrature_dt);
    duh.push(forcing(0.0));
    for (std::size_t i : idx) {
      const double t = times[i];
      const double tol = 1e-9 * quadrature_dt;
      while (std::fabs(duh.last_time()) + quadrature_dt <= std::fabs(t) + tol)
        duh.push(forcing(double(duh.nodes()) * duh.step()));
      if (std::fabs(std::fabs(t) - std::fabs(duh.last_time())) <= tol)
        out[i] = duh.value();
      else
        out[i] = duh.value_at(t, forcing(t));
    }
  }
  return out;
}

// ------------------------------------------------------------------------- Z5

Z5Split z5_at(const SpectralField& Z2, const SpectralField& z2, int out_cutoff) {
  if (out_cutoff < 0) out_cutoff = z2.cutoff();
  const int big = std::max(Z2.cutoff(), z2.cutoff());
  const SpectralField a = Z2.cutoff() == big ? Z2 : Z2.resized(big);
  const SpectralField b = z2.cutoff() == big ? z2 : z2.resized(big);
  const int cut[2] = {Z2.cutoff(), z2.cutoff()};
  ParaproductSplit s = paraproduct_split(a, b, out_cutoff, product_grid_size(cut, out_cutoff));
  Z5Split r{std::move(s.low), std::move(s.resonant), std::move(s.high), SpectralField()};
  r.total = r.low + r.resonant + r.high;
  return r;
}

// ------------------------------------------------------------ enhanced data

EnhancedSource::EnhancedSource(const GaussianDraw& draw, int N, double alpha, double mass, double sigma,
                               double dt_q)
    : draw_(&draw), N_(N), alpha_(alpha), mass_(mass), sigma_(sigma), dt_q_(dt_q),
      duhamel_(FrequencyBox(N), mass, dt_q) {
  if (N > draw.n_max) throw std::invalid_argument("EnhancedSource: N exceeds the draw's N_max");
}

void EnhancedSource::advance() {
  const double t = double(next_node_) * dt_q_;
  const int M = cubic_grid(N_);
  const auto& k = simd::active();
  EnhancedSample s;
  s.t = t;
  s.z1 = z1_at(*draw_, N_, alpha_, t, mass_);
  s.z1_dot = z1_velocity_at(*draw_, N_, alpha_, t, mass_);
  const GridField z1g = to_grid(s.z1, M);
  GridField Z2g{M, 2 * N_, std::vector<double>(z1g.size())};
  GridField Z3g{M, 3 * N_, std::vector<double>(z1g.size())};
  k.wick_powers(z1g.values.data(), sigma_, Z2g.values.data(), Z3g.values.data(), z1g.size());
  s.Z2 = to_spectral(Z2g, 2 * N_);
  s.Z3 = to_spectral(Z3g, N_);
  SpectralField F = s.Z3;
  F *= -1.0;
  duhamel_.push(F);
  s.z2 = duhamel_.value();
  s.z2_dot = duhamel_.velocity();
  GridField Z5g = to_grid(s.z2, M);
  k.multiply(Z5g.values.data(), Z2g.values.data(), Z5g.values.data(), Z5g.size());
  s.Z5 = to_spectral(Z5g, N_);
  current_ = std::move(s);
  ++next_node_;
}

const EnhancedSample& EnhancedSource::at(double t) {
  const double kf = t / dt_q_;
  const long k = std::lround(kf);
  if (k < 0 || std::fabs(kf - double(k)) > 1e-6) throw std::invalid_argument("EnhancedSource: time is not a node");
  if (current_ && k < next_node_ - 1) throw std::invalid_argument("EnhancedSource: time went backwards");
  while (next_node_ <= k) advance();
  return *current_;
}

EnhancedDataSet build_enhanced(const GaussianDraw& draw, int N, double alpha, double mass, double sigma,
                               std::span<const double> times, double dt_q, bool with_split) {
  EnhancedDataSet set;
  set.mass = mass;
  set.sigma = sigma;
  set.renorm = solve_CN(alpha, N);
  EnhancedSource src(draw, N, alpha, mass, sigma, dt_q);
  for (double t : times) {
    const EnhancedSample& s = src.at(t);
    set.time_grid.push_back(t);
    set.z1.push_back(s.z1);
    set.Z2.push_back(s.Z2);
    set.Z3.push_back(s.Z3);
    set.z2.push_back(s.z2);
    set.Z5.push_back(s.Z5);
    if (with_split) {
      Z5Split sp = z5_at(s.Z2, s.z2, N);
      set.Z5_low.push_back(std::move(sp.low));
      set.Z5_res.push_back(std::move(sp.resonant));
      set.Z5_high.push_back(std::move(sp.high));
    }
  }
  return set;
}

// --------------------------------------------------------------- variances

double exact_diff_variance(int j, double alpha, int N, int M) {
  if (M < N) throw std::invalid_argument("exact_diff_variance: M < N");
  const double sN = sigma_exact(alpha, N);
  const double sM = sigma_exact(alpha, M);
  KahanSum tail;
  for (const Shell& sh : lattice_shells(M))
    if (sh.norm_sq > N * N) tail.add(double(sh.multiplicity) * std::pow(1.0 + sh.norm_sq, -alpha));
  const double tau = tail.value();
  switch (j) {
    case 1: return tau;
    case 2: return 4.0 * sN * tau + 2.0 * tau * tau;
    case 3: return 6.0 * (sM * sM * sM - sN * sN * sN);
  }
  throw std::invalid_argument("exact_diff_variance: j must be 1, 2 or 3");
}

// ------------------------------------------------------------- point sampler

PointSampler::PointSampler(std::vector<int> levels, double alpha, double t, const Point& x, double mass)
    : levels_(std::move(levels)) {
  if (levels_.empty() || !std::is_sorted(levels_.begin(), levels_.end()))
    throw std::invalid_argument("PointSampler: levels must be ascending");
  const FrequencyBox box(levels_.back());
  const auto modes = box.modes();
  const auto r2 = box.norms_sq();
  for (std::size_t i = box.zero_index(); i < modes.size(); ++i) {
    Mode n = modes[i];
    if (!in_lambda(n)) n = {-n[0], -n[1], -n[2]};
    const double w = kg_frequency(r2[i], mass);
    const double amp = w * std::pow(1.0 + r2[i], 0.5 * (alpha - 1.0));
    const Complex e = std::polar(1.0, n[0] * x[0] + n[1] * x[1] + n[2] * x[2]);
    Term term;
    term.n = n;
    term.level = int(std::lower_bound(levels_.begin(), levels_.end(), 0,
                                      [&](int L, int) { return L * L < r2[i]; }) -
                     levels_.begin());
    term.zero = (r2[i] == 0);
    const double f = term.zero ? 1.0 : 2.0;
    term.cg = f * e * std::cos(t * w) / amp;
    term.ch = f * e * std::sin(t * w) / amp;
    terms_.push_back(term);
  }
}

std::vector<double> PointSampler::sample(std::uint64_t master_seed) const {
  std::vector<double> v(levels_.size(), 0.0);
  for (const Term& term : terms_) {
    const Complex g = gaussian_coefficient(master_seed, term.n, GaussStream::G);
    const Complex h = gaussian_coefficient(master_seed, term.n, GaussStream::H);
    v[term.level] += (g * term.cg + h * term.ch).real();
  }
  for (std::size_t k = 1; k < v.size(); ++k) v[k] += v[k - 1];
  return v;
}

std::string to_string(ObjectSelector s) {
  switch (s) {
    case ObjectSelector::z1: return "z1";
    case ObjectSelector::Z2: return "Z2";
    case ObjectSelector::Z3: return "Z3";
  }
  return "?";
}

Estimate moment_ratio(ObjectSelector sel, int p, int sample_count, std::uint64_t seed, double alpha, int N) {
  if (sample_count < 100) throw std::invalid_argument("moment_ratio: need at least 100 samples");
  if (p < 2) throw std::invalid_argument("moment_ratio: p must be >= 2");
  const double sigma = sigma_exact(alpha, N);
  const PointSampler ps({N}, alpha, 0.3, {0.4, 1.1, 2.5});
  std::vector<double> a(sample_count), b(sample_count);
  for (int s = 0; s < sample_count; ++s) {
    const double z = ps.sample(seed + std::uint64_t(s))[0];
    const double X = sel == ObjectSelector::z1 ? z : sel == ObjectSelector::Z2 ? z * z - sigma
                                                                               : z * (z * z - 3 * sigma);
    a[s] = std::pow(std::fabs(X), p);
    b[s] = X * X;
  }
  const double n = sample_count;
  double ma = 0, mb = 0;
  for (int s = 0; s < sample_count; ++s) ma += a[s], mb += b[s];
  ma /= n;
  mb /= n;
  double vaa = 0, vbb = 0, vab = 0;
  for (int s = 0; s < sample_count; ++s) {
    vaa += (a[s] - ma) * (a[s] - ma);
    vbb += (b[s] - mb) * (b[s] - mb);
    vab += (a[s] - ma) * (b[s] - mb);
  }
  vaa /= n - 1;
  vbb /= n - 1;
  vab /= n - 1;
  const double R = std::pow(ma, 1.0 / p) / std::sqrt(mb);
  const double ga = R / (p * ma), gb = -R / (2 * mb);
  const double var = (ga * ga * vaa + gb * gb * vbb + 2 * ga * gb * vab) / n;
  return {R, std::sqrt(std::max(var, 0.0))};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    ++n;
  }
  if (n < 2) return 0.0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ContinuityTable modulus_of_continuity(ObjectSelector sel, double t, std::span<const double> h_ladder,
                                      const NormSpec& spec, int sample_count, std::uint64_t seed,
                                      double alpha, int N) {
  const double sigma = sigma_exact(alpha, N);
  auto object = [&](const GaussianDraw& d, double s) {
    const SpectralField z = z1_at(d, N, alpha, s);
    switch (sel) {
      case ObjectSelector::z1: return z;
      case ObjectSelector::Z2: return wick_square(z, sigma);
      case ObjectSelector::Z3: return wick_cube(z, sigma);
    }
    return z;
  };
  std::vector<std::vector<double>> vals(h_ladder.size(), std::vector<double>(sample_count));
  for (int s = 0; s < sample_count; ++s) {
    const GaussianDraw d = sample_draw(seed + std::uint64_t(s), N);
    const SpectralField base = object(d, t);
    for (std::size_t k = 0; k < h_ladder.size(); ++k)
      vals[k][s] = h_ladder[k] == 0.0 ? 0.0 : norm(object(d, t + h_ladder[k]) - base, spec);
  }
  ContinuityTable table;
  std::vector<double> hs, ms;
  for (std::size_t k = 0; k < h_ladder.size(); ++k) {
    double m = 0, v = 0;
    for (double x : vals[k]) m += x;
    m /= sample_count;
    for (double x : vals[k]) v += (x - m) * (x - m);
    v = sample_count > 1 ? v / (sample_count - 1) : 0.0;
    table.rows.push_back({h_ladder[k], m, std::sqrt(v / sample_count)});
    hs.push_back(h_ladder[k]);
    ms.push_back(m);
  }
  table.slope = loglog_slope(hs, ms);
  return table;
}

}  // namespace wnl
