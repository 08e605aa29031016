#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
// the output is a pure function of (counter, key).

#include <array>
#include <cmath>
#include <cstdint>

namespace wnl {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

constexpr PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) noexcept {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(M0) * c[0];
    const std::uint64_t p1 = std::uint64_t(M1) * c[2];
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += W0;
    k[1] += W1;
  }
  return c;
}

/// Uniform in the open interval (0, 1) from 64 random bits (53 used).
inline double open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = (std::uint64_t(hi) << 32 | lo) >> 11;
  return (double(bits) + 0.5) * 0x1.0p-53;
}

/// Two independent N(0,1) values from one Philox block via Box-Muller.
inline std::array<double, 2> philox_normal_pair(const PhiloxCounter& c, const PhiloxKey& k) noexcept {
  const PhiloxCounter r = philox4x32_10(c, k);
  const double u1 = open_unit(r[0], r[1]);
  const double u2 = open_unit(r[2], r[3]);
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 6.283185307179586476925 * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

inline PhiloxKey philox_key(std::uint64_t seed) noexcept {
  return {std::uint32_t(seed), std::uint32_t(seed >> 32)};
}

}  // namespace wnl
