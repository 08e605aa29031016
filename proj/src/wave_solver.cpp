#include <wnl/simd_kernels.hpp>
#include <wnl/wave_solver.hpp>

#include <cmath>
#include <functional>

namespace wnl {

std::string to_string(Equation e) {
  switch (e) {
    case Equation::residual_w: return "residual_w";
    case Equation::full_renormalized: return "full_renormalized";
    case Equation::full_unrenormalized_reformulated: return "full_unrenormalized_reformulated";
    case Equation::renormalized_modified: return "renormalized_modified";
  }
  return "?";
}

Equation equation_from_string(const std::string& s) {
  for (Equation e : {Equation::residual_w, Equation::full_renormalized, Equation::full_unrenormalized_reformulated,
                     Equation::renormalized_modified})
    if (s == to_string(e)) return e;
  throw std::invalid_argument("unknown equation variant: " + s);
}

// ------------------------------------------------------------- linear flow

InitialData propagate_linear(const InitialData& data, double t, double mass) {
  if (!(mass >= 1.0)) throw std::invalid_argument("propagate_linear: mass must be >= 1");
  if (data.position.cutoff() != data.velocity.cutoff())
    throw std::invalid_argument("propagate_linear: position/velocity boxes differ");
  InitialData out = data;
  const auto r2 = data.position.box().norms_sq();
  const std::size_t n = r2.size();
  std::vector<double> c(n), s(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = kg_frequency(r2[i], mass);
    c[i] = std::cos(t * w[i]);
    s[i] = std::sin(t * w[i]);
  }
  simd::active().rotate_modes(out.position.coefficients().data(), out.velocity.coefficients().data(), c.data(),
                              s.data(), w.data(), n);
  return out;
}

Trajectory duhamel_apply(const Trajectory& forcing, double mass) {
  const auto& ts = forcing.times;
  if (ts.size() < 2) throw std::invalid_argument("duhamel_apply: need at least two samples");
  if (ts[0] != 0.0) throw std::invalid_argument("duhamel_apply: time grid must start at 0");
  const double h = ts[1] - ts[0];
  for (std::size_t k = 1; k < ts.size(); ++k)
    if (std::fabs((ts[k] - ts[k - 1]) - h) > 1e-9 * std::fabs(h))
      throw std::invalid_argument("duhamel_apply: non-uniform time grid");
  TrapezoidDuhamel duh(forcing.position.front().box(), mass, h);
  Trajectory out;
  out.mass = mass;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    duh.push(forcing.position[k]);
    out.times.push_back(ts[k]);
    out.position.push_back(duh.value());
    out.velocity.push_back(duh.velocity());
  }
  return out;
}

// ------------------------------------------------------------------ stepping

namespace {

struct Constants {
  double sigma_N = 0;
  double C_N = 1;
};

Constants constants_for(const SolverConfig& cfg) {
  Constants k;
  k.sigma_N = sigma_exact(cfg.alpha, cfg.N);
  if (cfg.equation == Equation::full_unrenormalized_reformulated || cfg.equation == Equation::renormalized_modified)
    k.C_N = cfg.C_override ? *cfg.C_override : solve_CN(cfg.alpha, cfg.N).C_N;
  return k;
}

LinearTerms terms_with(const SolverConfig& cfg, const Constants& k, double t) {
  switch (cfg.equation) {
    case Equation::residual_w: return {1.0, 0.0};
    case Equation::full_renormalized: return {1.0, cfg.shift_override ? *cfg.shift_override : 3.0 * k.sigma_N};
    case Equation::full_unrenormalized_reformulated: return {k.C_N, k.C_N};
    case Equation::renormalized_modified: return {1.0, 3.0 * modified_variance(cfg.alpha, cfg.N, k.C_N, t)};
  }
  return {};
}

int steps_for(const SolverConfig& cfg) {
  if (!(cfg.dt > 0) || !(cfg.T > 0)) throw std::invalid_argument("solver: T and dt must be positive");
  const double r = cfg.T / cfg.dt;
  const long n = std::lround(r);
  if (std::fabs(r - double(n)) > 1e-8 * r) throw std::invalid_argument("solver: T must be a multiple of dt");
  if (n < 16) throw std::invalid_argument("solver: dt must be <= T/16");
  return int(n);
}

using Kick = std::function<void(double t_mid, const SpectralField& u, SpectralField& out)>;

// Strang splitting: half linear flow, full kick v -= dt K(t + dt/2, u), half linear flow.
Trajectory strang(InitialData state, double mass, const SolverConfig& cfg, const Kick& kick) {
  const int steps = steps_for(cfg);
  const double dt = cfg.dt;
  const FrequencyBox box = state.position.box();
  const auto r2 = box.norms_sq();
  const std::size_t n = r2.size();
  std::vector<double> c(n), s(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = kg_frequency(r2[i], mass);
    c[i] = std::cos(0.5 * dt * w[i]);
    s[i] = std::sin(0.5 * dt * w[i]);
  }
  const auto& kern = simd::active();
  auto half_flow = [&] {
    kern.rotate_modes(state.position.coefficients().data(), state.velocity.coefficients().data(), c.data(),
                      s.data(), w.data(), n);
  };

  Trajectory traj;
  traj.mass = mass;
  const int save_cut = cfg.save_cutoff < 0 ? box.cutoff() : std::min(cfg.save_cutoff, box.cutoff());
  auto save = [&](double t) {
    traj.times.push_back(t);
    traj.position.push_back(save_cut == box.cutoff() ? state.position : state.position.resized(save_cut));
    if (cfg.save_velocity)
      traj.velocity.push_back(save_cut == box.cutoff() ? state.velocity : state.velocity.resized(save_cut));
  };
  save(0.0);

  SpectralField K(box);
  const int every = std::max(cfg.save_every, 1);
  for (int k = 1; k <= steps; ++k) {
    const double t0 = double(k - 1) * dt;
    half_flow();
    if (!cfg.linear_only) {
      kick(t0 + 0.5 * dt, state.position, K);
      state.velocity.add_scaled(K, -dt);
    }
    half_flow();
    const double t = double(k) * dt;

    const double big = std::max(kern.max_abs(reinterpret_cast<const double*>(state.position.coefficients().data()),
                                             2 * n),
                                kern.max_abs(reinterpret_cast<const double*>(state.velocity.coefficients().data()),
                                             2 * n));
    if (!std::isfinite(big) || big > cfg.blowup_threshold) {
      traj.flagged = true;
      traj.flag_time = t;
      traj.flag_reason = std::isfinite(big) ? "norm above blowup threshold" : "non-finite value";
      return traj;
    }
    if (k % every == 0 || k == steps) save(t);
  }
  return traj;
}

int grid_for(const SolverConfig& cfg) {
  const int M = cfg.grid_size > 0 ? cfg.grid_size : fft_friendly_size(4 * cfg.N + 1);
  if (M < 2 * cfg.N + 1) throw std::invalid_argument("solver: grid too small");
  return M;
}

InitialData resized_data(const InitialData& d, int N) {
  return {d.position.resized(N), d.velocity.resized(N)};
}

}  // namespace

LinearTerms linear_terms(const SolverConfig& config, double t) {
  return terms_with(config, constants_for(config), t);
}

InitialData full_initial_data(const GaussianDraw& draw, const SolverConfig& cfg, const InitialData* deterministic) {
  InitialData d;
  switch (cfg.equation) {
    case Equation::full_renormalized:
      d = truncated_data(draw, cfg.N, cfg.alpha);
      break;
    case Equation::full_unrenormalized_reformulated:
    case Equation::renormalized_modified:
      d = modified_data(draw, cfg.N, cfg.alpha, constants_for(cfg).C_N);
      break;
    case Equation::residual_w:
      throw std::invalid_argument("full_initial_data: residual_w is not a full variant");
  }
  if (deterministic) {
    const InitialData w = resized_data(*deterministic, cfg.N);
    d.position += w.position;
    d.velocity += w.velocity;
  }
  return d;
}

Trajectory solve_full(const GaussianDraw& draw, const SolverConfig& cfg, const InitialData* deterministic) {
  if (cfg.equation == Equation::residual_w) throw std::invalid_argument("solve_full: use solve_w for residual_w");
  const Constants consts = constants_for(cfg);
  const InitialData data = full_initial_data(draw, cfg, deterministic);
  const double mass = terms_with(cfg, consts, 0.0).mass;
  const int M = grid_for(cfg);
  GridField g{M, cfg.N, {}};
  const auto& kern = simd::active();
  const Kick kick = [&](double t, const SpectralField& u, SpectralField& out) {
    const double shift = terms_with(cfg, consts, t).shift;
    g.grid_size = M;
    to_grid_into(u, g);
    kern.cube_shift(g.values.data(), -shift, g.values.data(), g.size());
    out = to_spectral(g, u.box());
  };
  return strang(data, mass, cfg, kick);
}

Trajectory solve_w(EnhancedSource& enhanced, const InitialData& w_data, const SolverConfig& cfg) {
  if (enhanced.cutoff() != cfg.N) throw std::invalid_argument("solve_w: enhanced cutoff differs from N");
  const double ratio = 0.5 * cfg.dt / enhanced.step();
  if (std::fabs(ratio - std::round(ratio)) > 1e-9 || ratio < 0.5)
    throw std::invalid_argument("solve_w: enhanced step must divide dt/2");
  const int M = grid_for(cfg);
  if (M < fft_friendly_size(4 * cfg.N + 1)) throw std::invalid_argument("solve_w: grid must exceed 4N");
  const auto& kern = simd::active();
  GridField wg{M, cfg.N, {}}, z1g{M, cfg.N, {}}, z2g{M, cfg.N, {}};
  std::vector<double> Z2g, outg;
  const Kick kick = [&](double t, const SpectralField& w, SpectralField& out) {
    const EnhancedSample& s = enhanced.at(t);
    to_grid_into(w, wg);
    to_grid_into(s.z1, z1g);
    to_grid_into(s.z2, z2g);
    const std::size_t n = wg.size();
    Z2g.resize(n);
    outg.resize(n);
    for (std::size_t i = 0; i < n; ++i) Z2g[i] = z1g.values[i] * z1g.values[i] - enhanced.sigma();
    kern.residual_forcing(z1g.values.data(), Z2g.data(), z2g.values.data(), wg.values.data(), outg.data(), n);
    GridField F{M, cfg.N, std::move(outg)};
    out = to_spectral(F, w.box());
    outg = std::move(F.values);
    out.add_scaled(s.Z5, 3.0);
  };
  return strang(resized_data(w_data, cfg.N), enhanced.mass(), cfg, kick);
}

// ---------------------------------------------------------------- diagnostics

double energy(const SpectralField& u, const SpectralField& v) {
  const auto r2 = u.box().norms_sq();
  KahanSum quad;
  for (std::size_t i = 0; i < u.size(); ++i) quad.add(0.5 * std::norm(v[i]) + 0.5 * (1.0 + r2[i]) * std::norm(u[i]));
  const GridField g = to_grid(u, fft_friendly_size(4 * u.cutoff() + 1));
  const double quartic = simd::active().sum_pow4(g.values.data(), g.size()) * g.cell_volume();
  return kTorusVolume * quad.value() + 0.25 * quartic;
}

namespace {

void check_samples(const Trajectory& traj) {
  if (traj.times.empty()) throw std::invalid_argument("trajectory norm: empty trajectory");
  const double span = traj.times.back() - traj.times.front();
  if (double(traj.times.size() - 1) < 8.0 * span)
    throw std::invalid_argument("trajectory norm: fewer than 8 samples per unit time");
}

}  // namespace

double ct_hs_norm(const Trajectory& traj, double s) {
  check_samples(traj);
  double m = 0;
  for (const auto& u : traj.position) m = std::max(m, std::sqrt(sobolev_norm_sq(u, s)));
  return m;
}

double lq_wsr_norm(const Trajectory& traj, double q, double s, double r) {
  check_samples(traj);
  std::vector<double> f;
  for (const auto& u : traj.position) f.push_back(norm(u, NormSpec::sobolev(s, r)));
  if (std::isinf(q)) return *std::max_element(f.begin(), f.end());
  double acc = 0;
  for (std::size_t k = 1; k < f.size(); ++k)
    acc += 0.5 * (traj.times[k] - traj.times[k - 1]) * (std::pow(f[k], q) + std::pow(f[k - 1], q));
  return std::pow(acc, 1.0 / q);
}

double xt_norm(const Trajectory& traj) { return ct_hs_norm(traj, 0.5) + lq_wsr_norm(traj, 4.0, 0.0, 4.0); }

double bump(double t, double T) {
  if (!(t > 0) || !(t < T)) return 0.0;
  const double y = 2.0 * t / T - 1.0;
  return std::exp(-1.0 / (1.0 - y * y));
}

Complex pair_distribution(const Trajectory& traj, std::span<const double> psi, const Mode& m) {
  if (psi.size() != traj.times.size()) throw std::invalid_argument("pair_distribution: psi/time size mismatch");
  if (traj.position.empty()) return {};
  const Mode neg{-m[0], -m[1], -m[2]};
  if (!traj.position.front().box().find(neg)) throw std::invalid_argument("pair_distribution: m outside box");
  Complex acc{};
  for (std::size_t k = 1; k < traj.times.size(); ++k) {
    const double h = traj.times[k] - traj.times[k - 1];
    acc += 0.5 * h * (psi[k] * traj.position[k].at(neg) + psi[k - 1] * traj.position[k - 1].at(neg));
  }
  return kTorusVolume * acc;
}

Complex pair_bump(const Trajectory& traj, double T, const Mode& m) {
  std::vector<double> psi;
  for (double t : traj.times) psi.push_back(bump(t, T));
  return pair_distribution(traj, psi, m);
}

}  // namespace wnl
