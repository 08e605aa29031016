#include <wnl/renormalization.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace wnl {

std::span<const Shell> lattice_shells(int N) {
  if (N < 0) throw std::invalid_argument("lattice_shells: negative cutoff");
  static std::mutex m;
  static std::map<int, std::shared_ptr<const std::vector<Shell>>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& slot = cache[N];
  if (!slot) {
    const int N2 = N * N;
    std::vector<std::int64_t> count(std::size_t(N2) + 1, 0);
    for (int a = -N; a <= N; ++a)
      for (int b = -N; b <= N; ++b) {
        const int ab = a * a + b * b;
        if (ab > N2) continue;
        for (int c = -N; c <= N; ++c) {
          const int r2 = ab + c * c;
          if (r2 <= N2) ++count[r2];
        }
      }
    auto shells = std::make_shared<std::vector<Shell>>();
    for (int k = 0; k <= N2; ++k)
      if (count[k]) shells->push_back({k, count[k]});
    slot = shells;
  }
  return *slot;
}

double sigma_exact(double alpha, int N) {
  KahanSum s;
  for (const Shell& sh : lattice_shells(N)) s.add(double(sh.multiplicity) * std::pow(1.0 + sh.norm_sq, -alpha));
  return s.value();
}

double sigma_mass(double alpha, int N, double mass) {
  KahanSum s;
  for (const Shell& sh : lattice_shells(N))
    s.add(double(sh.multiplicity) / ((mass + sh.norm_sq) * std::pow(1.0 + sh.norm_sq, alpha - 1.0)));
  return s.value();
}

double modified_variance(double alpha, int N, double C_N, double t) {
  KahanSum s;
  for (const Shell& sh : lattice_shells(N)) {
    const double b = std::sqrt(1.0 + sh.norm_sq);
    const double c = std::cos(t * b), sn = std::sin(t * b);
    const double low = std::pow(1.0 + sh.norm_sq, alpha - 1.0);
    s.add(double(sh.multiplicity) * (c * c / ((C_N + sh.norm_sq) * low) + sn * sn / ((1.0 + sh.norm_sq) * low)));
  }
  return s.value();
}

namespace {

// F(C) = C - 3 sum m / ((C + k) w_k) and F'(C), increasing in C.
struct CNEquation {
  std::vector<double> mult, k, w;

  double F(double C) const {
    KahanSum s;
    for (std::size_t i = 0; i < k.size(); ++i) s.add(mult[i] / ((C + k[i]) * w[i]));
    return C - 3.0 * s.value();
  }
  double dF(double C) const {
    KahanSum s;
    for (std::size_t i = 0; i < k.size(); ++i) {
      const double d = C + k[i];
      s.add(mult[i] / (d * d * w[i]));
    }
    return 1.0 + 3.0 * s.value();
  }
};

}  // namespace

RenormConstants solve_CN(double alpha, int N) {
  if (N < 0) throw std::invalid_argument("solve_CN: negative cutoff");
  CNEquation eq;
  for (const Shell& sh : lattice_shells(N)) {
    eq.mult.push_back(double(sh.multiplicity));
    eq.k.push_back(sh.norm_sq);
    eq.w.push_back(std::pow(1.0 + sh.norm_sq, alpha - 1.0));
  }
  double lo = 1.0;
  double hi = 3.0 * std::pow(2.0 * N + 1.0, 3);
  if (eq.F(lo) > 0 || eq.F(hi) < 0) throw std::runtime_error("solve_CN: root not bracketed");
  int iter = 0;
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    (eq.F(mid) < 0 ? lo : hi) = mid;
    if (++iter > 400) throw std::runtime_error("solve_CN: bisection did not converge");
  }
  double C = 0.5 * (lo + hi);
  for (int k = 0; k < 20; ++k) {
    const double step = eq.F(C) / eq.dF(C);
    C -= step;
    if (std::fabs(step) <= 1e-15 * C) break;
  }
  RenormConstants r;
  r.alpha = alpha;
  r.N = N;
  r.sigma_N = sigma_exact(alpha, N);
  r.alpha_N = 3.0 * r.sigma_N - 1.0;
  r.C_N = C;
  r.R_N = C - 3.0 * r.sigma_N;
  r.residual = std::fabs(eq.F(C)) / C;
  if (!(r.residual <= 1e-12) || C < 1.0) throw std::runtime_error("solve_CN: Newton polish failed");
  return r;
}

std::vector<AsymptoticRow> asymptotic_report(double alpha, std::span<const int> ladder) {
  std::vector<AsymptoticRow> rows;
  std::map<int, double> sigma;
  for (int N : ladder) sigma[N] = sigma_exact(alpha, N);
  for (int N : ladder) {
    const RenormConstants rc = solve_CN(alpha, N);
    AsymptoticRow row;
    row.N = N;
    row.sigma_N = rc.sigma_N;
    row.C_N = rc.C_N;
    row.R_N = rc.R_N;
    row.rel_R = std::fabs(rc.R_N) / rc.sigma_N;
    auto it = sigma.find(2 * N);
    row.sigma_ratio = it == sigma.end() ? std::numeric_limits<double>::quiet_NaN() : it->second / rc.sigma_N;
    row.ratio_reference = std::pow(2.0, 3.0 - 2.0 * alpha);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace wnl
