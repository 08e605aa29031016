#include <wnl/experiments.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace wnl {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "wnlw 1.0";

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct MeanSe {
  double mean = 0, se = 0;
};

MeanSe mean_se(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= double(v.size());
  double var = 0;
  for (double x : v) var += (x - m) * (x - m);
  var /= double(v.size() - 1);
  return {m, std::sqrt(var / double(v.size()))};
}

double hs_norm(const SpectralField& f, double s) { return std::sqrt(sobolev_norm_sq(f, s)); }

// ||a - b||_{H^s} with both embedded in the larger box.
double hs_distance(const SpectralField& a, const SpectralField& b, double s) {
  const int c = std::max(a.cutoff(), b.cutoff());
  SpectralField d = a.cutoff() == c ? a : a.resized(c);
  d -= b.cutoff() == c ? b : b.resized(c);
  return hs_norm(d, s);
}

// Levels needed for differences X_{2N} - X_N over the ladder.
std::vector<int> doubled_levels(const std::vector<int>& ladder) {
  std::set<int> s;
  for (int N : ladder) {
    s.insert(N);
    s.insert(2 * N);
  }
  return {s.begin(), s.end()};
}

SolverConfig solver_config(const ExperimentConfig& c, int N, Equation eq) {
  SolverConfig s;
  s.alpha = c.alpha;
  s.N = N;
  s.T = c.T;
  s.dt = c.dt;
  s.equation = eq;
  s.save_every = c.save_every;
  s.save_velocity = false;
  return s;
}

GaussianDraw draw_for(const ExperimentConfig& c, std::uint64_t seed, int n_max) {
  return c.zero_noise ? GaussianDraw::zeros(n_max) : sample_draw(seed, n_max);
}

std::string csv_quote(const std::string& s) {
  std::string r = "\"";
  for (char ch : s) {
    if (ch == '"') r += '"';
    r += ch;
  }
  return r + "\"";
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --------------------------------------------------------------------- config

void validate(const ExperimentConfig& c) {
  if (c.N_ladder.size() < 3) throw std::invalid_argument("config: ladder needs at least 3 levels");
  for (std::size_t i = 0; i < c.N_ladder.size(); ++i) {
    if (!is_power_of_two(c.N_ladder[i])) throw std::invalid_argument("config: ladder levels must be powers of 2");
    if (i && c.N_ladder[i] <= c.N_ladder[i - 1]) throw std::invalid_argument("config: ladder must increase");
  }
  if (c.sample_count < 1) throw std::invalid_argument("config: sample_count must be >= 1");
  if (!(c.T > 0) || !(c.dt > 0)) throw std::invalid_argument("config: T and dt must be positive");
  if (c.save_every < 1) throw std::invalid_argument("config: save_every must be >= 1");
  if (c.threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (c.mc_samples < 100) throw std::invalid_argument("config: mc_samples must be >= 100");
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["alpha"] = c.alpha;
  j["N_ladder"] = c.N_ladder;
  j["T"] = c.T;
  j["dt"] = c.dt;
  j["sample_count"] = c.sample_count;
  j["master_seed"] = c.master_seed;
  j["regularity"] = c.regularity;
  j["regularity_offset"] = c.regularity_offset;
  j["equation"] = to_string(c.equation);
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  j["save_every"] = c.save_every;
  j["decomposition_max_n"] = c.decomposition_max_n;
  j["zero_noise"] = c.zero_noise;
  j["mc_samples"] = c.mc_samples;
  return j.dump(2);
}

namespace {

ExperimentConfig config_from(const json& j) {
  ExperimentConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "alpha") c.alpha = v.get<double>();
    else if (k == "N_ladder") c.N_ladder = v.get<std::vector<int>>();
    else if (k == "T") c.T = v.get<double>();
    else if (k == "dt") c.dt = v.get<double>();
    else if (k == "sample_count") c.sample_count = v.get<int>();
    else if (k == "master_seed") c.master_seed = v.get<std::uint64_t>();
    else if (k == "regularity") c.regularity = v.get<double>();
    else if (k == "regularity_offset") c.regularity_offset = v.get<double>();
    else if (k == "equation") c.equation = equation_from_string(v.get<std::string>());
    else if (k == "output_dir") c.output_dir = v.get<std::string>();
    else if (k == "threads") c.threads = v.get<int>();
    else if (k == "save_every") c.save_every = v.get<int>();
    else if (k == "decomposition_max_n") c.decomposition_max_n = v.get<int>();
    else if (k == "zero_noise") c.zero_noise = v.get<bool>();
    else if (k == "mc_samples") c.mc_samples = v.get<int>();
    else throw std::invalid_argument("config: unknown key '" + k + "'");
  }
  return c;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  return config_from(j);
}

void for_each_sample(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, count); ++t)
    pool.emplace_back([&] {
      for (int k; (k = next.fetch_add(1)) < count;) {
        try {
          body(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ----------------------------------------------------------------- convergence

std::vector<double> ConvergenceResult::medians(const std::vector<int>& ladder) const {
  std::vector<double> out;
  for (int N : ladder) {
    std::vector<double> v;
    for (const auto& r : rows)
      if (r.N == N && !r.flagged) v.push_back(r.d_N);
    out.push_back(median_of(v));
  }
  return out;
}

double ConvergenceResult::monotone_fraction() const {
  std::map<std::uint64_t, std::vector<const ConvergenceRow*>> by_seed;
  for (const auto& r : rows) by_seed[r.seed].push_back(&r);
  int good = 0, total = 0;
  for (const auto& [seed, rs] : by_seed) {
    bool flagged = false;
    for (auto* r : rs) flagged = flagged || r->flagged;
    if (flagged) continue;
    ++total;
    bool dec = true;
    for (std::size_t i = 1; i < rs.size(); ++i) dec = dec && rs[i]->d_N < rs[i - 1]->d_N;
    good += dec;
  }
  return total ? double(good) / total : 0.0;
}

ConvergenceResult run_convergence(const ExperimentConfig& c) {
  validate(c);
  const std::vector<int> levels = doubled_levels(c.N_ladder);
  const int n_max = levels.back();
  const double s = c.regularity;

  struct PerSample {
    std::vector<ConvergenceRow> rows;
    std::vector<DecompositionRow> dec;
    bool flagged = false;
  };
  std::vector<PerSample> per(c.sample_count);

  for_each_sample(c.sample_count, c.threads, [&](int k) {
    const std::uint64_t seed = sample_seed(c, k);
    const GaussianDraw draw = draw_for(c, seed, n_max);
    std::map<int, Trajectory> traj;
    for (int L : levels) traj[L] = solve_full(draw, solver_config(c, L, c.equation));

    PerSample& out = per[k];
    for (int N : c.N_ladder) {
      const Trajectory& a = traj[N];
      const Trajectory& b = traj[2 * N];
      ConvergenceRow row{seed, N, std::numeric_limits<double>::quiet_NaN(), a.flagged || b.flagged};
      if (!row.flagged) {
        double d = 0;
        for (std::size_t i = 0; i < a.times.size(); ++i) d = std::max(d, hs_distance(b.position[i], a.position[i], s));
        row.d_N = d;
      }
      out.flagged = out.flagged || row.flagged;
      out.rows.push_back(row);
    }

    if (c.equation != Equation::full_renormalized) return;
    for (int N : c.N_ladder) {
      if (N > c.decomposition_max_n || traj[N].flagged) continue;
      const double sigma = sigma_exact(c.alpha, N);
      SolverConfig wc = solver_config(c, N, Equation::residual_w);
      EnhancedSource src(draw, N, c.alpha, 1.0, sigma, c.dt / 2);
      const InitialData zero{SpectralField{FrequencyBox(N)}, SpectralField{FrequencyBox(N)}};
      const Trajectory w = solve_w(src, zero, wc);
      const Trajectory& u = traj[N];
      const auto z2 = z2_trajectory(draw, N, c.alpha, u.times, 1.0, sigma, c.dt / 2);
      double gap = 0;
      for (std::size_t i = 0; i < u.times.size(); ++i) {
        SpectralField sum = z1_at(draw, N, c.alpha, u.times[i]);
        sum += z2[i];
        sum += w.position[i];
        gap = std::max(gap, hs_distance(u.position[i], sum, s));
      }
      out.dec.push_back({seed, N, gap});
    }
  });

  ConvergenceResult r;
  r.samples = c.sample_count;
  for (auto& p : per) {
    r.rows.insert(r.rows.end(), p.rows.begin(), p.rows.end());
    r.decomposition.insert(r.decomposition.end(), p.dec.begin(), p.dec.end());
    r.flagged_samples += p.flagged;
  }
  return r;
}

// ------------------------------------------------------------------ triviality

const std::vector<Mode>& phi_battery() {
  static const std::vector<Mode> b{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}};
  return b;
}

std::vector<int> triviality_ladder(const ExperimentConfig& c) {
  if (c.alpha >= 1.5) return {4, 16, 64};
  return c.N_ladder;
}

InitialData triviality_data(int N) {
  SpectralField w0{FrequencyBox(N)};
  w0.set_pair({1, 0, 0}, Complex(0.5, 0.0));
  return {w0, SpectralField{FrequencyBox(N)}};
}

TrivialityResult run_triviality(const ExperimentConfig& c) {
  validate(c);
  const std::vector<int> ladder = triviality_ladder(c);
  const Equation variants[2] = {Equation::full_unrenormalized_reformulated, Equation::renormalized_modified};

  struct PerSample {
    std::vector<TrivialityRow> rows;
    bool flagged = false;
  };
  std::vector<PerSample> per(c.sample_count);

  for_each_sample(c.sample_count, c.threads, [&](int k) {
    const std::uint64_t seed = sample_seed(c, k);
    const GaussianDraw draw = draw_for(c, seed, ladder.back());
    for (Equation eq : variants)
      for (int N : ladder) {
        SolverConfig sc = solver_config(c, N, eq);
        sc.save_every = 1;
        sc.save_cutoff = 2;
        const InitialData det = triviality_data(N);
        const Trajectory u = solve_full(draw, sc, &det);
        per[k].flagged = per[k].flagged || u.flagged;
        for (std::size_t p = 0; p < phi_battery().size(); ++p) {
          TrivialityRow row{seed, N, int(p), Complex(std::numeric_limits<double>::quiet_NaN()), eq, u.flagged};
          if (!u.flagged) row.pairing = pair_bump(u, c.T, phi_battery()[p]);
          per[k].rows.push_back(row);
        }
      }
  });

  TrivialityResult r;
  r.samples = c.sample_count;
  r.ladder = ladder;
  for (auto& p : per) {
    r.rows.insert(r.rows.end(), p.rows.begin(), p.rows.end());
    r.flagged_samples += p.flagged;
  }
  return r;
}

// ----------------------------------------------------------- stochastic checks

namespace {

CheckRow within_3se(std::string id, json params, double expected, const MeanSe& est) {
  return {std::move(id), params.dump(), expected, est.mean, est.se,
          std::fabs(est.mean - expected) <= 3 * est.se};
}

CheckRow upper_bound(std::string id, json params, double bound, double observed, double se) {
  return {std::move(id), params.dump(), bound, observed, se, observed <= bound};
}

const Point kCheckPoint{0.4, 1.1, 2.5};
constexpr double kCheckTime = 0.3;

std::uint64_t check_seed(const ExperimentConfig& c, int family, int k) {
  return c.master_seed * 1000003ULL + std::uint64_t(family) * 100000000ULL + std::uint64_t(k);
}

}  // namespace

std::vector<CheckRow> run_stochastic_checks(const ExperimentConfig& c) {
  std::vector<CheckRow> rows;
  const int S = c.mc_samples;

  // pointwise variances of z1, Z2, Z3 against sigma_N, 2 sigma_N^2, 6 sigma_N^3
  const std::pair<double, int> var_cases[] = {{1.5, 1}, {c.alpha, 8}};
  int family = 0;
  for (auto [alpha, N] : var_cases) {
    const double sigma = sigma_exact(alpha, N);
    const PointSampler ps({N}, alpha, kCheckTime, kCheckPoint);
    std::vector<double> v1(S), v2(S), v3(S), m2(S);
    for (int s = 0; s < S; ++s) {
      const double z = ps.sample(check_seed(c, family, s))[0];
      const double Z2 = z * z - sigma, Z3 = z * (z * z - 3 * sigma);
      v1[s] = z * z;
      v2[s] = Z2 * Z2;
      v3[s] = Z3 * Z3;
      m2[s] = Z2;
    }
    const json p{{"alpha", alpha}, {"N", N}, {"samples", S}};
    rows.push_back(within_3se("variance_z1", p, sigma, mean_se(v1)));
    rows.push_back(within_3se("variance_Z2", p, 2 * sigma * sigma, mean_se(v2)));
    rows.push_back(within_3se("variance_Z3", p, 6 * sigma * sigma * sigma, mean_se(v3)));
    rows.push_back(within_3se("mean_Z2", p, 0.0, mean_se(m2)));
    ++family;
  }

  // tails Z_{j,M} - Z_{j,N}
  struct Tail {
    double alpha;
    int N, M;
  };
  const Tail tails[] = {{1.5, 0, 1}, {c.alpha, 4, 8}};
  for (const Tail& t : tails) {
    const PointSampler ps({t.N, t.M}, t.alpha, kCheckTime, kCheckPoint);
    const double sN = sigma_exact(t.alpha, t.N), sM = sigma_exact(t.alpha, t.M);
    std::vector<double> d[3];
    for (auto& v : d) v.resize(S);
    for (int s = 0; s < S; ++s) {
      const auto v = ps.sample(check_seed(c, family, s));
      const double a = v[0], b = v[1];
      d[0][s] = (b - a) * (b - a);
      d[1][s] = std::pow((b * b - sM) - (a * a - sN), 2);
      d[2][s] = std::pow(b * (b * b - 3 * sM) - a * (a * a - 3 * sN), 2);
    }
    for (int j = 1; j <= 3; ++j)
      rows.push_back(within_3se("tail_variance_" + std::to_string(j),
                                json{{"j", j}, {"alpha", t.alpha}, {"N", t.N}, {"M", t.M}, {"samples", S}},
                                exact_diff_variance(j, t.alpha, t.N, t.M), mean_se(d[j - 1])));
    ++family;
  }

  // Wiener chaos: ||X||_p / ||X||_2 <= (p - 1)^{k/2}
  const ObjectSelector sels[3] = {ObjectSelector::z1, ObjectSelector::Z2, ObjectSelector::Z3};
  for (int p : {4, 6})
    for (int k = 1; k <= 3; ++k) {
      const Estimate e = moment_ratio(sels[k - 1], p, S, check_seed(c, family, 0), c.alpha, 8);
      const json params{{"object", to_string(sels[k - 1])}, {"p", p}, {"alpha", c.alpha}, {"N", 8}, {"samples", S}};
      const double bound = std::pow(p - 1.0, k / 2.0);
      rows.push_back(upper_bound("chaos_bound", params, bound, e.value, e.stderr_));
      if (k == 1) {
        // Gaussian: (E g^p)^{1/p} exactly
        const double exact = p == 4 ? std::pow(3.0, 0.25) : std::pow(15.0, 1.0 / 6.0);
        rows.push_back(within_3se("chaos_gaussian_ratio", params, exact, {e.value, e.stderr_}));
      }
      ++family;
    }

  // modulus of continuity of z1 in L^2_x
  const std::vector<double> h{1.0 / 256, 1.0 / 128, 1.0 / 64, 1.0 / 32, 1.0 / 16};
  const ContinuityTable ct = modulus_of_continuity(ObjectSelector::z1, 0.2, h, NormSpec::sobolev(0.0), 40,
                                                   check_seed(c, family, 0), c.alpha, 6);
  rows.push_back({"continuity_slope", json{{"object", "z1"}, {"norm", "L2"}, {"alpha", c.alpha}, {"N", 6}}.dump(),
                  0.0, ct.slope, 0.0, ct.slope > 0});
  return rows;
}

// ------------------------------------------------------------- analysis checks

namespace {

// S(n) = sum_{n1 + n2 = n} <n1>^-a <n2>^-b over |n1| <= R for n = (k, 0, 0), plus
// the radial tail 4 pi R^{3-a-b} / (a+b-3) of |n1|^{-a-b}. The summand is even in
// y and z, so only y, z >= 0 are visited.
double convolution_sum(double a, double b, int k, int R, bool resonant) {
  const int R2 = R * R;
  const int big = (R + k) * (R + k);
  std::vector<double> pa(big + 1), pb(big + 1);
  std::vector<int> blk(big + 1);
  for (int i = 0; i <= big; ++i) {
    pa[i] = std::pow(1.0 + i, -0.5 * a);
    pb[i] = std::pow(1.0 + i, -0.5 * b);
    blk[i] = lp_block_index(i);
  }
  KahanSum acc;
  for (int y = 0; y <= R; ++y)
    for (int z = 0; z <= R; ++z) {
      const int yz = y * y + z * z;
      if (yz > R2) continue;
      double row = 0;
      for (int x = -R; x <= R; ++x) {
        const int r1 = x * x + yz;
        if (r1 > R2) continue;
        const int r2 = (k - x) * (k - x) + yz;
        if (resonant && std::abs(blk[r1] - blk[r2]) > 2) continue;
        row += pa[r1] * pb[r2];
      }
      acc.add((y ? 2 : 1) * (z ? 2 : 1) * row);
    }
  return acc.value() + 4 * kPi * std::pow(double(R), 3 - a - b) / (a + b - 3);
}

struct ConvCase {
  double a, b;
  bool resonant;
};

double convolution_exponent(const ConvCase& cc, const std::vector<int>& ks) {
  const int R = 4 * ks.back();
  std::vector<double> x, y;
  for (int k : ks) {
    x.push_back(std::sqrt(1.0 + double(k) * k));
    y.push_back(convolution_sum(cc.a, cc.b, k, R, cc.resonant));
  }
  return loglog_slope(x, y);
}

SpectralField seeded(int N, std::uint64_t seed, double decay) {
  // Hermitian field with <n>^{-decay} times standard complex Gaussians.
  const GaussianDraw d = sample_draw(seed, N);
  SpectralField f{FrequencyBox(N)};
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Mode& m = f.box().mode(i);
    f[i] = d.g[i] * std::pow(bracket(m), -decay);
  }
  return f;
}

Trajectory seeded_forcing(int N, std::uint64_t seed, double decay, double T, int samples) {
  const SpectralField f1 = seeded(N, seed, decay), f2 = seeded(N, seed + 7777, decay);
  Trajectory F;
  for (int k = 0; k <= samples; ++k) {
    const double t = T * k / samples;
    SpectralField f = f1;
    f *= std::cos(3 * t);
    f.add_scaled(f2, std::sin(7 * t));
    F.times.push_back(t);
    F.position.push_back(f);
  }
  return F;
}

struct RatioSuite {
  std::string id;
  std::function<double(int N, std::uint64_t seed, double a)> ratio;
  std::vector<double> masses{1.0};
  std::vector<int> Ns{4, 8, 16};
};

// Fitted constants for the ratio suites: observed maxima over N in {4, 8, 16},
// three seeds and all masses, rounded up with headroom.
double analysis_bound(const std::string& id) {
  static const std::map<std::string, double> bounds{
      {"ratio_para2a", 0.2},
      {"ratio_para2", 0.1},
      {"ratio_para3", 0.5},
      {"ratio_product_fractional_leibniz", 0.6},
      {"ratio_product_negative", 0.2},
      {"ratio_energy", 0.6},
      {"ratio_strichartz", 0.7},
  };
  return bounds.at(id);
}

}  // namespace

std::vector<CheckRow> run_analysis_checks(const ExperimentConfig& c) {
  std::vector<CheckRow> rows;

  // (a) convolution exponents, fitted on the two largest resolved |n|: the
  // lower-order terms still bend the slope by ~0.2 at |n| ~ 8.
  const std::vector<int> ks{32, 64};
  const ConvCase admissible[] = {{2.0, 2.0, false}, {1.5, 2.5, false}, {2.5, 2.5, false}, {2.0, 1.5, false},
                                 {2.0, 2.0, true},  {3.5, 2.0, true},  {4.0, 4.0, true}};
  for (const ConvCase& cc : admissible) {
    const double slope = convolution_exponent(cc, ks);
    const double expected = 3 - cc.a - cc.b;
    rows.push_back({cc.resonant ? "convolution_exponent_resonant" : "convolution_exponent",
                    json{{"a", cc.a}, {"b", cc.b}, {"n", ks}}.dump(), expected, slope, 0.0,
                    std::fabs(slope - expected) <= 0.15});
  }
  {
    const double slope = convolution_exponent({4.0, 4.0, false}, ks);
    rows.push_back({"convolution_bounded", json{{"a", 4.0}, {"b", 4.0}, {"n", ks}}.dump(), -2.0, slope, 0.0,
                    slope <= -2.0});
  }

  // (b) bounded-ratio suites across N in {4, 8, 16}
  const double T = 1.0;
  const int samples = 256;
  std::vector<RatioSuite> suites;
  suites.push_back({"ratio_para2a",
                    [](int N, std::uint64_t s, double) {
                      const SpectralField f = seeded(N, s, 2.0), g = seeded(N, s + 1, 2.2);
                      const auto p = paraproduct_split(f, g);
                      return norm(p.low, NormSpec::besov(0.5, 2, 2)) /
                             (norm(f, NormSpec::lebesgue(kInf)) * norm(g, NormSpec::besov(0.5, 2, 2)));
                    },
                    {1.0}, {8, 16, 32}});
  suites.push_back({"ratio_para2",
                    [](int N, std::uint64_t s, double) {
                      const SpectralField f = seeded(N, s, 1.4), g = seeded(N, s + 1, 2.2);
                      const auto p = paraproduct_split(f, g);
                      return norm(p.low, NormSpec::besov(0.2, 2, 2)) /
                             (norm(f, NormSpec::besov(-0.3, kInf, 2)) * norm(g, NormSpec::besov(0.5, 2, 2)));
                    },
                    {1.0}, {8, 16, 32}});
  suites.push_back({"ratio_para3",
                    [](int N, std::uint64_t s, double) {
                      const SpectralField f = seeded(N, s, 1.4), g = seeded(N, s + 1, 2.2);
                      const auto p = paraproduct_split(f, g);
                      return norm(p.resonant, NormSpec::besov(0.2, 2, 2)) /
                             (norm(f, NormSpec::besov(-0.3, kInf, 2)) * norm(g, NormSpec::besov(0.5, 2, 2)));
                    },
                    {1.0}, {8, 16, 32}});
  suites.push_back({"ratio_product_fractional_leibniz",
                    [](int N, std::uint64_t s, double) {
                      const SpectralField f = seeded(N, s, 2.0), g = seeded(N, s + 1, 2.0);
                      const SpectralField fg = dealiased_product(f, g);
                      const auto W = NormSpec::sobolev(0.5, 4), L4 = NormSpec::lebesgue(4);
                      return norm(fg, NormSpec::sobolev(0.5, 2)) /
                             (norm(f, W) * norm(g, L4) + norm(f, L4) * norm(g, W));
                    },
                    {1.0}});
  suites.push_back({"ratio_product_negative",
                    [](int N, std::uint64_t s, double) {
                      const SpectralField f = seeded(N, s, 1.0), g = seeded(N, s + 1, 2.5);
                      const SpectralField fg = dealiased_product(f, g);
                      return norm(fg, NormSpec::sobolev(-0.75, 4.0 / 3.0)) /
                             (norm(f, NormSpec::sobolev(-0.75, 2)) * norm(g, NormSpec::sobolev(0.75, 2)));
                    },
                    {1.0}});
  suites.push_back({"ratio_energy",
                    [=](int N, std::uint64_t s, double a) {
                      const Trajectory F = seeded_forcing(N, s, 1.0, T, samples);
                      const Trajectory u = duhamel_apply(F, a);
                      return ct_hs_norm(u, 0.5) / lq_wsr_norm(F, 1, -0.5, 2);
                    },
                    {1.0, 10.0, 100.0}});
  suites.push_back({"ratio_strichartz",
                    [=](int N, std::uint64_t s, double a) {
                      const Trajectory F = seeded_forcing(N, s, 1.0, T, samples);
                      const Trajectory u = duhamel_apply(F, a);
                      return xt_norm(u) / std::min(lq_wsr_norm(F, 1, -0.5, 2), lq_wsr_norm(F, 4.0 / 3.0, 0, 4.0 / 3.0));
                    },
                    {1.0, 10.0, 100.0}});

  const int seeds = 3;
  for (auto& suite : suites) {
    const double bound = analysis_bound(suite.id);
    for (double a : suite.masses) {
      const std::vector<int>& Ns = suite.Ns;
      std::vector<double> per_N;
      for (int N : Ns) {
        double mx = 0;
        for (int k = 0; k < seeds; ++k) mx = std::max(mx, suite.ratio(N, check_seed(c, 50, 10 * k + N), a));
        per_N.push_back(mx);
      }
      const double hi = *std::max_element(per_N.begin(), per_N.end());
      const double lo = *std::min_element(per_N.begin(), per_N.end());
      json p{{"a", a}, {"N", Ns}, {"seeds", seeds}, {"per_N_max", per_N}};
      rows.push_back({suite.id, p.dump(), bound, hi, 0.0, hi <= bound});
      rows.push_back({suite.id + "_stability", p.dump(), 2.0, hi / lo, 0.0, hi / lo <= 2.0});
    }
  }
  return rows;
}

// ------------------------------------------------------------ Sobolev battery

double battery_regularity(int j, double alpha) {
  const double e = alpha - 1.5;
  switch (j) {
    case 1: return e - 0.05;
    case 2: return 2 * e - 0.05;
    case 3: return 3 * e - 0.05;
    case 4: return 3 * e + 1 - 0.05;
    case 5: return std::min(5 * alpha - 6.5, 2 * e) - 0.05;
  }
  throw std::invalid_argument("battery_regularity: j must be in 1..5");
}

double BatteryResult::median(int j, double s, int N) const {
  std::vector<double> v;
  for (const auto& r : rows)
    if (r.j == j && r.N == N && std::fabs(r.s - s) < 1e-12) v.push_back(r.norm);
  return median_of(v);
}

BatteryResult run_sobolev_battery(const ExperimentConfig& c, const std::vector<int>& objects,
                                  const std::vector<std::pair<int, double>>& extra_shifts) {
  validate(c);
  const std::vector<int> levels = doubled_levels(c.N_ladder);
  const int n_max = levels.back();
  std::vector<double> times;
  for (int k = 1; k <= 4; ++k) times.push_back(c.T * k / 4);
  const double dt_q = c.T / 32;

  // (j, s) pairs, objects in ascending order
  std::vector<std::pair<int, double>> specs;
  for (int j : objects) specs.push_back({j, battery_regularity(j, c.alpha) + c.regularity_offset});
  for (auto [j, shift] : extra_shifts) specs.push_back({j, battery_regularity(j, c.alpha) + shift});
  bool need[6] = {};
  for (auto [j, s] : specs) need[j] = true;

  std::vector<std::vector<BatteryRow>> per(c.sample_count);
  for_each_sample(c.sample_count, c.threads, [&](int k) {
    const std::uint64_t seed = sample_seed(c, k);
    const GaussianDraw draw = draw_for(c, seed, n_max);
    std::map<int, std::vector<SpectralField>> z2;
    if (need[4] || need[5])
      for (int L : levels) z2[L] = z2_trajectory(draw, L, c.alpha, times, 1.0, sigma_exact(c.alpha, L), dt_q);

    std::map<std::pair<int, int>, double> best;  // (spec index, N) -> sup_t
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      std::map<int, SpectralField> obj[6];
      for (int L : levels) {
        const double sigma = sigma_exact(c.alpha, L);
        const SpectralField z = z1_at(draw, L, c.alpha, times[ti]);
        if (need[1]) obj[1][L] = z;
        SpectralField Z2;
        if (need[2] || need[5]) Z2 = wick_square(z, sigma);
        if (need[3]) obj[3][L] = wick_cube(z, sigma);
        if (need[4]) obj[4][L] = z2[L][ti];
        if (need[5]) obj[5][L] = z5_at(Z2, z2[L][ti]).resonant;
        if (need[2]) obj[2][L] = std::move(Z2);
      }
      for (std::size_t si = 0; si < specs.size(); ++si) {
        const auto [j, s] = specs[si];
        for (int N : c.N_ladder) {
          double& b = best[{int(si), N}];
          b = std::max(b, hs_distance(obj[j][2 * N], obj[j][N], s));
        }
      }
    }
    for (std::size_t si = 0; si < specs.size(); ++si)
      for (int N : c.N_ladder) per[k].push_back({seed, specs[si].first, specs[si].second, N, best[{int(si), N}]});
  });

  BatteryResult r;
  r.ladder = c.N_ladder;
  for (auto& p : per) r.rows.insert(r.rows.end(), p.begin(), p.end());
  return r;
}

// ------------------------------------------------------------------ persistence

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
  if (!os) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace

void write_outputs(const RunOutputs& out, const ExperimentConfig& c, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path dir(directory);
  std::vector<std::string> files;
  int samples = 0, flagged = 0;

  if (out.convergence) {
    std::ostringstream os;
    os << "seed,N,d_N,flagged\n";
    for (const auto& r : out.convergence->rows)
      os << r.seed << ',' << r.N << ',' << format_double(r.d_N) << ',' << (r.flagged ? 1 : 0) << '\n';
    write_text(dir / "converge.csv", os.str());
    files.push_back("converge.csv");
    if (!out.convergence->decomposition.empty()) {
      std::ostringstream ds;
      ds << "seed,N,gap\n";
      for (const auto& r : out.convergence->decomposition)
        ds << r.seed << ',' << r.N << ',' << format_double(r.gap) << '\n';
      write_text(dir / "decomposition.csv", ds.str());
      files.push_back("decomposition.csv");
    }
    samples += out.convergence->samples;
    flagged += out.convergence->flagged_samples;
  }
  if (out.triviality) {
    std::ostringstream os;
    os << "seed,N,phi_id,re_pairing,im_pairing,variant\n";
    for (const auto& r : out.triviality->rows)
      os << r.seed << ',' << r.N << ',' << r.phi_id << ',' << format_double(r.pairing.real()) << ','
         << format_double(r.pairing.imag()) << ',' << to_string(r.variant) << '\n';
    write_text(dir / "triviality.csv", os.str());
    files.push_back("triviality.csv");
    samples += out.triviality->samples;
    flagged += out.triviality->flagged_samples;
  }
  if (out.checks) {
    std::ostringstream os;
    os << "check_id,param_json,expected,observed,stderr,pass\n";
    for (const auto& r : *out.checks)
      os << r.check_id << ',' << csv_quote(r.param_json) << ',' << format_double(r.expected) << ','
         << format_double(r.observed) << ',' << format_double(r.stderr_) << ',' << (r.pass ? 1 : 0) << '\n';
    write_text(dir / "checks.csv", os.str());
    files.push_back("checks.csv");
  }
  if (out.battery) {
    std::ostringstream os;
    os << "seed,j,s,N,norm\n";
    for (const auto& r : out.battery->rows)
      os << r.seed << ',' << r.j << ',' << format_double(r.s) << ',' << r.N << ',' << format_double(r.norm) << '\n';
    write_text(dir / "sobolev.csv", os.str());
    files.push_back("sobolev.csv");
  }
  if (out.renorm) {
    std::ostringstream os;
    os << "N,sigma,alpha_N,C_N,R_N\n";
    for (const auto& r : *out.renorm)
      os << r.N << ',' << format_double(r.sigma_N) << ',' << format_double(3 * r.sigma_N - 1) << ','
         << format_double(r.C_N) << ',' << format_double(r.R_N) << '\n';
    write_text(dir / "renorm.csv", os.str());
    files.push_back("renorm.csv");
  }

  json m;
  m["version"] = kVersion;
  m["config"] = json::parse(config_to_json(c));
  m["files"] = files;
  m["samples"] = samples;
  m["flagged"] = flagged;
  m["flag_rate"] = samples ? double(flagged) / samples : 0.0;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

Manifest read_manifest(const std::string& directory) {
  std::ifstream is(std::filesystem::path(directory) / "manifest.json");
  if (!is) throw std::runtime_error("cannot open manifest in " + directory);
  const json m = json::parse(is);
  Manifest r;
  r.version = m.at("version").get<std::string>();
  r.config = config_from(m.at("config"));
  r.files = m.at("files").get<std::vector<std::string>>();
  r.samples = m.at("samples").get<int>();
  r.flagged = m.at("flagged").get<int>();
  return r;
}

}  // namespace wnl
