#pragma once

// FFTW wrapper for the ball <-> grid transforms. Plans are created once per
// shape under a mutex; execution uses the new-array interface on per-thread
// workspaces, so concurrent callers never share buffers.
//
// Layout: real grid [x][y][z] (z fastest); half spectrum [kx][ky][kz] with
// kz in [0, M/2]. The pruned transforms assume the spectrum vanishes outside
// |k| <= N and skip every 1D line that only carries zeros.

#include <complex>
#include <cstddef>

namespace wnl::fft {

struct Workspace {
  int grid_size = 0;
  double* real = nullptr;                 // M * M * M
  std::complex<double>* half = nullptr;   // M * M * (M/2 + 1)

  std::size_t real_size() const noexcept;
  std::size_t half_size() const noexcept;
  std::size_t half_index(int kx, int ky, int kz) const noexcept;
};

/// Workspace for grid size M, owned by the calling thread.
Workspace& workspace(int grid_size);

/// half -> real, unnormalized backward transform of the full spectrum.
/// Destroys `half`.
void inverse(Workspace& ws);
/// real -> half, unnormalized forward transform.
void forward(Workspace& ws);

/// Same as inverse() for a spectrum supported in the ball |k| <= N.
void inverse_ball(Workspace& ws, int N);
/// Same as forward() but only the coefficients with |k| <= N are valid.
void forward_ball(Workspace& ws, int N);

}  // namespace wnl::fft
