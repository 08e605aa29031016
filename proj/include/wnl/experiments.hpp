#pragma once

// Experiment drivers: coupled-seed convergence ladders, the triviality
// pairings of the un-renormalized flow, Monte Carlo and analysis check tables,
// and their CSV/JSON persistence.
//
// Every result is a pure function of (config, master_seed). Sample k uses the
// draw with master seed master_seed + k; workers pick samples by index and the
// results are merged in sample order, so the thread count never changes output.

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <wnl/wave_solver.hpp>

namespace wnl {

struct ExperimentConfig {
  double alpha = 1.4;
  std::vector<int> N_ladder{4, 8, 16};
  double T = 0.1;
  double dt = 0.1 / 256;
  int sample_count = 32;
  std::uint64_t master_seed = 7;
  double regularity = -0.15;        // s in d_N = ||u_2N - u_N||_{C_T H^s}
  double regularity_offset = 0.0;   // added to every default s_j of the Sobolev battery
  Equation equation = Equation::full_renormalized;
  std::string output_dir = "out";
  int threads = 1;
  int save_every = 8;
  int decomposition_max_n = 8;      // u = z1 + z2 + w is checked only up to this N
  bool zero_noise = false;          // all Gaussians forced to 0
  int mc_samples = 10000;
};

/// Throws std::invalid_argument on a non-dyadic or short ladder, sample_count < 1, etc.
void validate(const ExperimentConfig& config);

/// Flat JSON object with the field names above (equation as its string name).
std::string config_to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);

inline std::uint64_t sample_seed(const ExperimentConfig& c, int k) { return c.master_seed + std::uint64_t(k); }

/// Runs body(k) for k in [0, count) on `threads` workers.
void for_each_sample(int count, int threads, const std::function<void(int)>& body);

// ------------------------------------------------------------ Theorem 3 ladder

struct ConvergenceRow {
  std::uint64_t seed = 0;
  int N = 0;
  double d_N = 0;      // NaN when flagged
  bool flagged = false;
};

struct DecompositionRow {
  std::uint64_t seed = 0;
  int N = 0;
  double gap = 0;      // sup_t ||u_N - (z1 + z2 + w)||_{H^s}
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;          // seed-major, ladder order
  std::vector<DecompositionRow> decomposition;
  int samples = 0;
  int flagged_samples = 0;

  /// Median of d_N over unflagged samples, per ladder level.
  std::vector<double> medians(const std::vector<int>& ladder) const;
  /// Fraction of unflagged samples with d_N strictly decreasing along the ladder.
  double monotone_fraction() const;
};

ConvergenceResult run_convergence(const ExperimentConfig& config);

// ----------------------------------------------------------- Theorem 4 pairings

/// Test-function battery: psi(t) e^{i m.x}, psi the bump on (0, T).
const std::vector<Mode>& phi_battery();

struct TrivialityRow {
  std::uint64_t seed = 0;
  int N = 0;
  int phi_id = 0;
  Complex pairing{};
  Equation variant = Equation::full_unrenormalized_reformulated;
  bool flagged = false;
};

struct TrivialityResult {
  std::vector<TrivialityRow> rows;  // seed-major, then variant, N, phi
  int samples = 0;
  int flagged_samples = 0;
  std::vector<int> ladder;
};

/// Ladder actually used: the configured one, or {4, 16, 64} at alpha = 3/2.
std::vector<int> triviality_ladder(const ExperimentConfig& config);
/// Deterministic part (w0, w1) = (cos x1, 0).
InitialData triviality_data(int N);
TrivialityResult run_triviality(const ExperimentConfig& config);

// --------------------------------------------------------------- check tables

struct CheckRow {
  std::string check_id;
  std::string param_json;
  double expected = 0;
  double observed = 0;
  double stderr_ = 0;
  bool pass = false;
};

/// Variances against sum oracles, tail variances, chaos ratios, continuity slope.
std::vector<CheckRow> run_stochastic_checks(const ExperimentConfig& config);
/// Convolution exponents and bounded-ratio suites for the product, paraproduct,
/// energy and Strichartz inequalities.
std::vector<CheckRow> run_analysis_checks(const ExperimentConfig& config);

// ------------------------------------------------- Sobolev convergence battery

/// Default regularity for object j in 1..5: z1, Z2, Z3, z2, resonant part of Z5.
double battery_regularity(int j, double alpha);

struct BatteryRow {
  std::uint64_t seed = 0;
  int j = 0;
  double s = 0;
  int N = 0;
  double norm = 0;  // sup_t ||Z_{j,2N} - Z_{j,N}||_{H^s}
};

struct BatteryResult {
  std::vector<BatteryRow> rows;
  std::vector<int> ladder;
  /// Median over samples of the row values for (j, s, N).
  double median(int j, double s, int N) const;
};

/// Objects j in `objects`, each at battery_regularity(j) + regularity_offset and,
/// for every (j, shift) in `extra_shifts`, also at battery_regularity(j) + shift.
BatteryResult run_sobolev_battery(const ExperimentConfig& config, const std::vector<int>& objects,
                                  const std::vector<std::pair<int, double>>& extra_shifts = {});

// ------------------------------------------------------------------ persistence

struct RunOutputs {
  std::optional<ConvergenceResult> convergence;
  std::optional<TrivialityResult> triviality;
  std::optional<std::vector<CheckRow>> checks;
  std::optional<BatteryResult> battery;
  std::optional<std::vector<AsymptoticRow>> renorm;
};

/// Writes the CSV tables present in `out` plus manifest.json into `directory`.
void write_outputs(const RunOutputs& out, const ExperimentConfig& config, const std::string& directory);

struct Manifest {
  ExperimentConfig config;
  std::vector<std::string> files;
  int samples = 0;
  int flagged = 0;
  std::string version;
};
Manifest read_manifest(const std::string& directory);

/// Shortest round-trip decimal ("%.17g").
std::string format_double(double v);

}  // namespace wnl
