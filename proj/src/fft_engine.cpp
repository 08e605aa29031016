#include "fft_engine.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace wnl::fft {
namespace {

constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct FullPlans {
  fftw_plan c2r = nullptr;
  fftw_plan r2c = nullptr;
};

const FullPlans& full_plans(int M) {
  static std::map<int, FullPlans> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto it = cache.find(M);
  if (it != cache.end()) return it->second;
  const std::size_t nreal = std::size_t(M) * M * M;
  const std::size_t nhalf = std::size_t(M) * M * (M / 2 + 1);
  double* r = fftw_alloc_real(nreal);
  fftw_complex* c = fftw_alloc_complex(nhalf);
  FullPlans p;
  p.c2r = fftw_plan_dft_c2r_3d(M, M, M, c, r, FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
  p.r2c = fftw_plan_dft_r2c_3d(M, M, M, r, c, FFTW_ESTIMATE);
  fftw_free(r);
  fftw_free(c);
  if (!p.c2r || !p.r2c) throw std::runtime_error("fftw plan creation failed");
  return cache.emplace(M, p).first->second;
}

// Plans for the pruned pipeline, keyed by (kind, M, howmany).
enum class Kind { LinesX, LinesY, ManyZ_c2r, ManyZ_r2c };

fftw_plan line_plan(Kind kind, int sign, int M, int howmany) {
  static std::map<std::tuple<int, int, int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  const auto key = std::make_tuple(int(kind), sign, M, howmany);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const int Mh = M / 2 + 1;
  const std::size_t nreal = std::size_t(M) * M * M;
  const std::size_t nhalf = std::size_t(M) * M * Mh;
  double* r = fftw_alloc_real(nreal);
  fftw_complex* c = fftw_alloc_complex(nhalf);
  fftw_plan p = nullptr;
  const int n[1] = {M};
  switch (kind) {
    case Kind::LinesX:  // howmany consecutive kz at fixed ky, stride along kx
      p = fftw_plan_many_dft(1, n, howmany, c, nullptr, M * Mh, 1, c, nullptr, M * Mh, 1, sign, kFlags);
      break;
    case Kind::LinesY:  // kz = 0..howmany-1 at fixed x, stride along ky
      p = fftw_plan_many_dft(1, n, howmany, c, nullptr, Mh, 1, c, nullptr, Mh, 1, sign, kFlags);
      break;
    case Kind::ManyZ_c2r:
      p = fftw_plan_many_dft_c2r(1, n, howmany, c, nullptr, 1, Mh, r, nullptr, 1, M,
                                 kFlags | FFTW_DESTROY_INPUT);
      break;
    case Kind::ManyZ_r2c:
      p = fftw_plan_many_dft_r2c(1, n, howmany, r, nullptr, 1, M, c, nullptr, 1, Mh, kFlags);
      break;
  }
  fftw_free(r);
  fftw_free(c);
  if (!p) throw std::runtime_error("fftw plan creation failed");
  cache.emplace(key, p);
  return p;
}

struct OwnedWorkspace {
  Workspace ws;
  ~OwnedWorkspace() {
    fftw_free(ws.real);
    fftw_free(ws.half);
  }
};

inline fftw_complex* fc(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

// Largest kz with ky^2 + kz^2 <= N^2.
inline int disk_extent(int N, int ky) {
  int kz = 0;
  while ((kz + 1) * (kz + 1) + ky * ky <= N * N) ++kz;
  return kz;
}

void lines_x(Workspace& ws, int N, int sign) {
  const int M = ws.grid_size;
  for (int ky = -N; ky <= N; ++ky) {
    const int count = disk_extent(N, ky) + 1;
    fftw_plan p = line_plan(Kind::LinesX, sign, M, count);
    fftw_complex* base = fc(ws.half + ws.half_index(0, ky, 0));
    fftw_execute_dft(p, base, base);
  }
}

void lines_y(Workspace& ws, int N, int sign) {
  const int M = ws.grid_size;
  fftw_plan p = line_plan(Kind::LinesY, sign, M, N + 1);
  for (int x = 0; x < M; ++x) {
    fftw_complex* base = fc(ws.half + ws.half_index(x, 0, 0));
    fftw_execute_dft(p, base, base);
  }
}

}  // namespace

std::size_t Workspace::real_size() const noexcept {
  return std::size_t(grid_size) * grid_size * grid_size;
}

std::size_t Workspace::half_size() const noexcept {
  return std::size_t(grid_size) * grid_size * (grid_size / 2 + 1);
}

std::size_t Workspace::half_index(int kx, int ky, int kz) const noexcept {
  const int M = grid_size;
  const int ix = kx < 0 ? kx + M : kx;
  const int iy = ky < 0 ? ky + M : ky;
  return (std::size_t(ix) * M + iy) * std::size_t(M / 2 + 1) + kz;
}

Workspace& workspace(int grid_size) {
  thread_local std::map<int, std::unique_ptr<OwnedWorkspace>> pool;
  auto& slot = pool[grid_size];
  if (!slot) {
    slot = std::make_unique<OwnedWorkspace>();
    slot->ws.grid_size = grid_size;
    slot->ws.real = fftw_alloc_real(slot->ws.real_size());
    slot->ws.half = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(slot->ws.half_size()));
  }
  return slot->ws;
}

void inverse(Workspace& ws) {
  const FullPlans& p = full_plans(ws.grid_size);
  fftw_execute_dft_c2r(p.c2r, fc(ws.half), ws.real);
}

void forward(Workspace& ws) {
  const FullPlans& p = full_plans(ws.grid_size);
  fftw_execute_dft_r2c(p.r2c, ws.real, fc(ws.half));
}

void inverse_ball(Workspace& ws, int N) {
  const int M = ws.grid_size;
  if (2 * N + 1 > M) throw std::invalid_argument("inverse_ball: cutoff exceeds grid");
  lines_x(ws, N, FFTW_BACKWARD);
  lines_y(ws, N, FFTW_BACKWARD);
  fftw_plan p = line_plan(Kind::ManyZ_c2r, 0, M, M * M);
  fftw_execute_dft_c2r(p, fc(ws.half), ws.real);
}

void forward_ball(Workspace& ws, int N) {
  const int M = ws.grid_size;
  if (2 * N + 1 > M) throw std::invalid_argument("forward_ball: cutoff exceeds grid");
  fftw_plan p = line_plan(Kind::ManyZ_r2c, 0, M, M * M);
  fftw_execute_dft_r2c(p, ws.real, fc(ws.half));
  lines_y(ws, N, FFTW_FORWARD);
  lines_x(ws, N, FFTW_FORWARD);
}

}  // namespace wnl::fft
