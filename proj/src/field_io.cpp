#include <wnl/field_io.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace wnl {
namespace {

static_assert(std::endian::native == std::endian::little, "field dumps assume a little-endian host");

constexpr char kMagic[4] = {'W', 'N', 'L', 'W'};

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 4)) throw std::runtime_error("field dump truncated");
  return v;
}

double get_f64(std::istream& is) {
  double v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 8)) throw std::runtime_error("field dump truncated");
  return v;
}

void put_header(std::ostream& os, std::uint32_t version, const FrequencyBox& box) {
  os.write(kMagic, 4);
  put_u32(os, version);
  put_u32(os, std::uint32_t(box.cutoff()));
  put_u32(os, std::uint32_t(box.grid_size()));
}

FrequencyBox get_header(std::istream& is, std::uint32_t expected_version) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("not a WNLW dump");
  const std::uint32_t version = get_u32(is);
  if (version != expected_version) throw std::runtime_error("unexpected WNLW format version");
  const int N = int(get_u32(is));
  const int M = int(get_u32(is));
  return FrequencyBox(N, M);
}

void put_coeffs(std::ostream& os, const SpectralField& f) {
  for (const Complex& c : f.coefficients()) {
    put_f64(os, c.real());
    put_f64(os, c.imag());
  }
}

SpectralField get_coeffs(std::istream& is, const FrequencyBox& box) {
  SpectralField f(box);
  for (auto& c : f.coefficients()) {
    const double re = get_f64(is);
    c = Complex(re, get_f64(is));
  }
  return f;
}

}  // namespace

void write_field(std::ostream& os, const SpectralField& f) {
  put_header(os, 1, f.box());
  put_coeffs(os, f);
}

SpectralField read_field(std::istream& is) {
  const FrequencyBox box = get_header(is, 1);
  return get_coeffs(is, box);
}

void write_field_file(const std::string& path, const SpectralField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_field(os, f);
}

SpectralField read_field_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_field(is);
}

void write_trajectory(std::ostream& os, const TrajectoryDump& traj) {
  if (traj.position.empty() || traj.position.size() != traj.times.size() ||
      traj.velocity.size() != traj.times.size())
    throw std::invalid_argument("write_trajectory: inconsistent trajectory");
  put_header(os, 2, traj.position.front().box());
  put_u32(os, std::uint32_t(traj.times.size()));
  put_u32(os, 2);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    put_f64(os, traj.times[k]);
    put_coeffs(os, traj.position[k]);
    put_coeffs(os, traj.velocity[k]);
  }
}

TrajectoryDump read_trajectory(std::istream& is) {
  const FrequencyBox box = get_header(is, 2);
  const std::uint32_t n = get_u32(is);
  if (get_u32(is) != 2) throw std::runtime_error("unexpected fields per time");
  TrajectoryDump out;
  for (std::uint32_t k = 0; k < n; ++k) {
    out.times.push_back(get_f64(is));
    out.position.push_back(get_coeffs(is, box));
    out.velocity.push_back(get_coeffs(is, box));
  }
  return out;
}

}  // namespace wnl
