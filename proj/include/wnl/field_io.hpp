#pragma once

// Binary field dumps.
//
//   "WNLW" | u32 version | u32 N | u32 M | payload
//
// version 1 payload: coefficients as little-endian f64 (re, im) pairs in the
// lexicographic mode order of the box.
// version 2 payload (trajectory): u32 n_times | u32 fields_per_time (= 2),
// then per time one f64 t followed by the position and velocity coefficient
// blocks in the version 1 layout.

#include <iosfwd>
#include <string>
#include <vector>

#include <wnl/spectral_core.hpp>

namespace wnl {

void write_field(std::ostream& os, const SpectralField& f);
SpectralField read_field(std::istream& is);

void write_field_file(const std::string& path, const SpectralField& f);
SpectralField read_field_file(const std::string& path);

struct TrajectoryDump {
  std::vector<double> times;
  std::vector<SpectralField> position;
  std::vector<SpectralField> velocity;
};

void write_trajectory(std::ostream& os, const TrajectoryDump& traj);
TrajectoryDump read_trajectory(std::istream& is);

}  // namespace wnl
