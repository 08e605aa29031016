// wnlw: command-line front end for the experiment drivers.
//
//   wnlw renorm     --alpha A --nmax N
//   wnlw sample     --alpha A --nmax N --seed S --out DIR
//   wnlw objects    --alpha A --nmax N --T T --seeds K --seed S [--out DIR]
//   wnlw solve      --alpha A --nmax N --T T --dt DT --seed S --variant V --out DIR
//   wnlw converge   [--config FILE] [overrides] --out DIR
//   wnlw triviality [--config FILE] [overrides] --out DIR
//   wnlw checks     [--config FILE] [--battery] --out DIR

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <wnl/experiments.hpp>
#include <wnl/field_io.hpp>
#include <wnl/renormalization.hpp>
#include <wnl/stochastic_objects.hpp>
#include <wnl/wave_solver.hpp>

using namespace wnl;

namespace {

struct Flags {
  double alpha = 1.4;
  int nmax = 16;
  double T = 0.1;
  double dt = 0;  // 0: T / 256
  int seeds = 32;
  std::uint64_t seed = 7;
  std::string out;
  std::string variant = "full_renormalized";
  std::string config;
  int threads = 1;
  bool battery = false;
};

std::vector<int> dyadic(int lo, int hi) {
  std::vector<int> v;
  for (int n = lo; n <= hi; n *= 2) v.push_back(n);
  return v;
}

// defaults <- config file <- flags given on the command line
ExperimentConfig resolve(const Flags& f, CLI::App& sub) {
  ExperimentConfig c;
  if (!f.config.empty()) {
    std::ifstream is(f.config);
    if (!is) throw std::runtime_error("cannot open config " + f.config);
    std::stringstream ss;
    ss << is.rdbuf();
    c = config_from_json(ss.str());
  }
  auto given = [&](const char* name) { return sub.count(name) > 0; };
  if (given("--alpha")) c.alpha = f.alpha;
  if (given("--nmax")) c.N_ladder = dyadic(4, f.nmax);
  if (given("--T")) c.T = f.T;
  if (given("--dt")) c.dt = f.dt;
  else if (given("--T")) c.dt = c.T / 256;
  if (given("--seeds")) c.sample_count = f.seeds;
  if (given("--seed")) c.master_seed = f.seed;
  if (given("--out")) c.output_dir = f.out;
  if (given("--variant")) c.equation = equation_from_string(f.variant);
  if (given("--threads")) c.threads = f.threads;
  validate(c);
  return c;
}

void add_common(CLI::App* s, Flags& f) {
  s->add_option("--alpha", f.alpha, "regularity parameter alpha");
  s->add_option("--nmax", f.nmax, "largest cutoff N");
  s->add_option("--T", f.T, "final time");
  s->add_option("--dt", f.dt, "time step (default T/256)");
  s->add_option("--seeds", f.seeds, "number of samples");
  s->add_option("--seed", f.seed, "master seed");
  s->add_option("--out", f.out, "output directory");
  s->add_option("--variant", f.variant, "equation variant");
  s->add_option("--config", f.config, "flat JSON experiment config");
  s->add_option("--threads", f.threads, "worker threads");
}

int cmd_renorm(const Flags& f) {
  std::vector<int> ladder{0};
  for (int n = 1; n <= f.nmax; n *= 2) ladder.push_back(n);
  const auto rows = asymptotic_report(f.alpha, ladder);
  std::cout << "N,sigma,alpha_N,C_N,R_N\n";
  for (const auto& r : rows)
    std::cout << r.N << ',' << format_double(r.sigma_N) << ',' << format_double(3 * r.sigma_N - 1) << ','
              << format_double(r.C_N) << ',' << format_double(r.R_N) << '\n';
  if (!f.out.empty()) {
    ExperimentConfig c;
    c.alpha = f.alpha;
    RunOutputs o;
    o.renorm = rows;
    write_outputs(o, c, f.out);
  }
  return 0;
}

int cmd_sample(const Flags& f) {
  if (f.out.empty()) throw std::runtime_error("sample: --out is required");
  std::filesystem::create_directories(f.out);
  const GaussianDraw d = sample_draw(f.seed, f.nmax);
  const InitialData data = truncated_data(d, f.nmax, f.alpha);
  write_field_file((std::filesystem::path(f.out) / "position.wnlw").string(), data.position);
  write_field_file((std::filesystem::path(f.out) / "velocity.wnlw").string(), data.velocity);
  std::cout << "wrote " << data.position.size() << " modes per field to " << f.out << '\n';
  return 0;
}

int cmd_objects(const Flags& f) {
  std::ostringstream os;
  os << "N,j,exact_variance,mc_variance,stderr,norm_mean,norm_sd\n";
  const Point x{0.4, 1.1, 2.5};
  const int norm_samples = std::min(f.seeds, 16);
  for (int N : dyadic(1, f.nmax)) {
    const double sigma = sigma_exact(f.alpha, N);
    const double exact[3] = {sigma, 2 * sigma * sigma, 6 * sigma * sigma * sigma};
    const PointSampler ps({N}, f.alpha, f.T, x);
    std::vector<double> sq[3];
    for (int k = 0; k < f.seeds; ++k) {
      const double z = ps.sample(f.seed + k)[0];
      const double Z[3] = {z, z * z - sigma, z * (z * z - 3 * sigma)};
      for (int j = 0; j < 3; ++j) sq[j].push_back(Z[j] * Z[j]);
    }
    std::vector<double> norms[3];
    for (int k = 0; k < norm_samples; ++k) {
      const GaussianDraw d = sample_draw(f.seed + k, N);
      const SpectralField z = z1_at(d, N, f.alpha, f.T);
      const SpectralField Z[3] = {z, wick_square(z, sigma), wick_cube(z, sigma)};
      for (int j = 0; j < 3; ++j) norms[j].push_back(std::sqrt(sobolev_norm_sq(Z[j], battery_regularity(j + 1, f.alpha))));
    }
    for (int j = 0; j < 3; ++j) {
      auto stats = [](const std::vector<double>& v) {
        double m = 0, q = 0;
        for (double a : v) m += a;
        m /= v.size();
        for (double a : v) q += (a - m) * (a - m);
        return std::pair{m, v.size() > 1 ? std::sqrt(q / (v.size() - 1)) : 0.0};
      };
      const auto [mv, sv] = stats(sq[j]);
      const auto [mn, sn] = stats(norms[j]);
      os << N << ',' << j + 1 << ',' << format_double(exact[j]) << ',' << format_double(mv) << ','
         << format_double(sv / std::sqrt(double(sq[j].size()))) << ',' << format_double(mn) << ','
         << format_double(sn) << '\n';
    }
  }
  std::cout << os.str();
  if (!f.out.empty()) {
    std::filesystem::create_directories(f.out);
    std::ofstream(std::filesystem::path(f.out) / "objects.csv") << os.str();
  }
  return 0;
}

int cmd_solve(const Flags& f) {
  if (f.out.empty()) throw std::runtime_error("solve: --out is required");
  SolverConfig c;
  c.alpha = f.alpha;
  c.N = f.nmax;
  c.T = f.T;
  c.dt = f.dt > 0 ? f.dt : f.T / 256;
  c.equation = equation_from_string(f.variant);
  const GaussianDraw d = sample_draw(f.seed, f.nmax);
  Trajectory u;
  if (c.equation == Equation::residual_w) {
    EnhancedSource src(d, c.N, c.alpha, 1.0, sigma_exact(c.alpha, c.N), c.dt / 2);
    const InitialData zero{SpectralField{FrequencyBox(c.N)}, SpectralField{FrequencyBox(c.N)}};
    u = solve_w(src, zero, c);
  } else {
    u = solve_full(d, c);
  }
  std::filesystem::create_directories(f.out);
  const auto dir = std::filesystem::path(f.out);
  {
    std::ofstream os(dir / "trajectory.wnlw", std::ios::binary);
    write_trajectory(os, {u.times, u.position, u.velocity});
  }
  std::ofstream csv(dir / "norms.csv");
  csv << "t,h_half,l4,energy\n";
  for (std::size_t k = 0; k < u.times.size(); ++k)
    csv << format_double(u.times[k]) << ',' << format_double(std::sqrt(sobolev_norm_sq(u.position[k], 0.5))) << ','
        << format_double(norm(u.position[k], NormSpec::lebesgue(4))) << ','
        << format_double(energy(u.position[k], u.velocity[k])) << '\n';
  if (u.flagged) std::cerr << "flagged at t = " << u.flag_time << ": " << u.flag_reason << '\n';
  std::cout << "solved " << u.times.size() - 1 << " steps, X_T norm " << xt_norm(u) << '\n';
  return u.flagged ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral experiments for the cubic wave equation on T^3 with random data"};
  app.require_subcommand(1);
  Flags f;
  auto* renorm = app.add_subcommand("renorm", "sigma_N, alpha_N, C_N, R_N along 0, 1, 2, 4, ..., nmax");
  auto* sample = app.add_subcommand("sample", "write truncated random data as field dumps");
  auto* objects = app.add_subcommand("objects", "variance and norm table for z1, Z2, Z3");
  auto* solve = app.add_subcommand("solve", "solve one equation variant and dump the trajectory");
  auto* converge = app.add_subcommand("converge", "coupled-seed convergence ladder");
  auto* triv = app.add_subcommand("triviality", "distributional pairings of the un-renormalized flow");
  auto* checks = app.add_subcommand("checks", "Monte Carlo and analysis check tables");
  for (auto* s : {renorm, sample, objects, solve, converge, triv, checks}) add_common(s, f);
  checks->add_flag("--battery", f.battery, "also run the Sobolev convergence battery");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*renorm) return cmd_renorm(f);
    if (*sample) return cmd_sample(f);
    if (*objects) return cmd_objects(f);
    if (*solve) return cmd_solve(f);
    if (*converge) {
      ExperimentConfig c = resolve(f, *converge);
      RunOutputs o;
      o.convergence = run_convergence(c);
      write_outputs(o, c, c.output_dir);
      const auto med = o.convergence->medians(c.N_ladder);
      for (std::size_t i = 0; i < med.size(); ++i)
        std::cout << "N = " << c.N_ladder[i] << "  median d_N = " << med[i] << '\n';
      std::cout << "strictly decreasing for " << o.convergence->monotone_fraction() * 100 << "% of samples, "
                << o.convergence->flagged_samples << " flagged\n";
      return 0;
    }
    if (*triv) {
      ExperimentConfig c = resolve(f, *triv);
      if (!triv->count("--T") && f.config.empty()) {
        c.T = 1.0;
        c.dt = 1.0 / 128;
        c.N_ladder = {4, 8, 16, 32};
      }
      RunOutputs o;
      o.triviality = run_triviality(c);
      write_outputs(o, c, c.output_dir);
      std::cout << o.triviality->rows.size() << " pairings written to " << c.output_dir << '\n';
      return 0;
    }
    if (*checks) {
      ExperimentConfig c = resolve(f, *checks);
      std::vector<CheckRow> rows = run_stochastic_checks(c);
      const auto an = run_analysis_checks(c);
      rows.insert(rows.end(), an.begin(), an.end());
      RunOutputs o;
      o.checks = rows;
      if (f.battery) o.battery = run_sobolev_battery(c, {1, 2, 3, 4, 5}, {{1, 0.3}});
      write_outputs(o, c, c.output_dir);
      int failed = 0;
      for (const auto& r : rows) failed += !r.pass;
      std::cout << rows.size() - failed << " / " << rows.size() << " checks pass\n";
      return failed ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
