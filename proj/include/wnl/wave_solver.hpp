#pragma once

// Klein-Gordon propagators, the Duhamel operator, a Strang splitting solver
// for the residual and full truncated cubic equations, and trajectory norms.
//
// Every variant is written as
//   d_t^2 u - Delta u + a u + P_N(u^3) - shift(t) u (+ forcing) = 0
// with the linear part L_a = d_t^2 - Delta + a integrated exactly and the
// rest applied as a midpoint velocity kick.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <wnl/random_data.hpp>
#include <wnl/renormalization.hpp>
#include <wnl/spectral_core.hpp>
#include <wnl/stochastic_objects.hpp>

namespace wnl {

enum class Equation {
  residual_w,                        // L w + F0 + F1(w) + F2(w) + F3(w) = 0 on enhanced data
  full_renormalized,                 // L u + u^3 - 3 sigma_N u = 0, truncated data
  full_unrenormalized_reformulated,  // L_{C_N} u + u^3 - C_N u = 0, modified data
  renormalized_modified,             // L u + u^3 - 3 sigma_hat(t) u = 0, modified data
};

std::string to_string(Equation e);
Equation equation_from_string(const std::string& s);

struct SolverConfig {
  double alpha = 1.4;
  int N = 8;
  double T = 0.1;
  double dt = 0.1 / 256;
  Equation equation = Equation::full_renormalized;
  int grid_size = 0;          // 0: smallest FFT-friendly M > 4N
  bool linear_only = false;   // drop the kick entirely
  int save_every = 1;         // store every k-th step (t = 0 and t = T always)
  int save_cutoff = -1;       // store fields truncated to this cutoff (-1: N)
  bool save_velocity = true;
  double blowup_threshold = 1e12;
  std::optional<double> C_override;      // replaces C_N
  std::optional<double> shift_override;  // replaces 3 sigma_N in full_renormalized
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> position;
  std::vector<SpectralField> velocity;  // empty when not saved
  double mass = 1.0;
  bool flagged = false;
  double flag_time = 0.0;
  std::string flag_reason;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
  double time;
};

/// Exact linear flow of L_a: per mode cos(t w) w0 + sin(t w)/w w1, w = sqrt(a + |n|^2).
InitialData propagate_linear(const InitialData& data, double t, double mass);

/// Zero-data solution of L_a u = F for F sampled on a uniform time grid
/// (trapezoid per mode).
Trajectory duhamel_apply(const Trajectory& forcing, double mass);

/// (mass a, shift at time t) of the assembled equation for a full variant.
struct LinearTerms {
  double mass = 1.0;
  double shift = 0.0;
};
LinearTerms linear_terms(const SolverConfig& config, double t);

/// Residual equation on streamed enhanced data. The source step must divide dt / 2.
Trajectory solve_w(EnhancedSource& enhanced, const InitialData& w_data, const SolverConfig& config);

/// Full truncated equation for one draw; `deterministic` adds (w0, w1) to the random data.
Trajectory solve_full(const GaussianDraw& draw, const SolverConfig& config,
                      const InitialData* deterministic = nullptr);

/// Initial data a full variant starts from.
InitialData full_initial_data(const GaussianDraw& draw, const SolverConfig& config,
                              const InitialData* deterministic = nullptr);

/// E = int 1/2 u_t^2 + 1/2 |grad u|^2 + 1/2 u^2 + 1/4 u^4 (quartic term exact on the M > 4N grid).
double energy(const SpectralField& position, const SpectralField& velocity);

/// sup_t ||u(t)||_{H^s}
double ct_hs_norm(const Trajectory& traj, double s);
/// || ||u(t)||_{W^{s,r}} ||_{L^q_t}, trapezoid in time (q = inf: max).
double lq_wsr_norm(const Trajectory& traj, double q, double s, double r);
/// ||u||_{L^inf_T H^{1/2}} + ||u||_{L^4_{T,x}}
double xt_norm(const Trajectory& traj);

/// psi(t) = exp(-1 / (1 - (2t/T - 1)^2)) on (0, T), zero elsewhere.
double bump(double t, double T);

/// int psi(t) (2 pi)^3 uhat(t, -m) dt by trapezoid over the trajectory times.
Complex pair_distribution(const Trajectory& traj, std::span<const double> psi, const Mode& m);
Complex pair_bump(const Trajectory& traj, double T, const Mode& m);

}  // namespace wnl
