#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "mfh/segments.hpp"

namespace mfh {

namespace detail {

// Philox4x32-10 (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform on (0, 1] from 53 high bits.
inline double to_unit_open0(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

inline std::uint64_t join(std::uint32_t hi, std::uint32_t lo) { return (static_cast<std::uint64_t>(hi) << 32) | lo; }

inline std::array<std::uint32_t, 2> split_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// Two standard normals from one Philox block (Box-Muller).
inline std::array<double, 2> normal_pair(const std::array<std::uint32_t, 4>& block) {
  const double u1 = to_unit_open0(join(block[0], block[1]));
  const double u2 = to_unit_open0(join(block[2], block[3]));
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace detail

/// Derives an independent seed for a named sub-experiment.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index = 0) {
  std::uint64_t h = detail::splitmix64(master);
  for (char c : tag) h = detail::splitmix64(h ^ static_cast<unsigned char>(c));
  return detail::splitmix64(h ^ detail::splitmix64(index));
}

/// Brownian increments for one particle. The increment at `step` is a pure function of
/// (master_seed, stream_id, step), so any schedule over particles reproduces the same noise.
struct NoiseStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  /// i.i.d. N(0, 1) coordinates for the given step.
  Vec standard_normals(std::uint64_t step, std::size_t d) const {
    Vec out(static_cast<Eigen::Index>(d));
    auto key = detail::split_key(master_seed);
    key[1] ^= static_cast<std::uint32_t>(stream_id >> 32);
    for (std::size_t k = 0; k < d; k += 2) {
      const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(k / 2), static_cast<std::uint32_t>(step),
                                                static_cast<std::uint32_t>(step >> 32),
                                                static_cast<std::uint32_t>(stream_id)};
      const auto pair = detail::normal_pair(detail::philox4x32(ctr, key));
      out(static_cast<Eigen::Index>(k)) = pair[0];
      if (k + 1 < d) out(static_cast<Eigen::Index>(k + 1)) = pair[1];
    }
    return out;
  }

  /// N(0, dt I_d) increment for the given step.
  Vec increments(std::uint64_t step, std::size_t d, double dt) const { return std::sqrt(dt) * standard_normals(step, d); }
};

inline Vec gaussian_increments(const NoiseStream& stream, std::uint64_t step, std::size_t d, double dt) {
  return stream.increments(step, d, dt);
}

/// Sequential generator on top of the same counter-based core, for utility sampling
/// (resampling atoms, random projections, initial laws).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(detail::split_key(detail::splitmix64(seed ^ 0x5EEDC0DE5EEDC0DEull))), stream_(stream) {}

  std::uint64_t next_u64() {
    if (cursor_ == 2) refill();
    return buffer_[cursor_++];
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n) by rejection, free of modulo bias.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = detail::to_unit_open0(next_u64());
    const double u2 = detail::to_unit_open0(next_u64());
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  void refill() {
    const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(position_),
                                              static_cast<std::uint32_t>(position_ >> 32),
                                              static_cast<std::uint32_t>(stream_),
                                              static_cast<std::uint32_t>(stream_ >> 32)};
    const auto block = detail::philox4x32(ctr, key_);
    buffer_ = {detail::join(block[0], block[1]), detail::join(block[2], block[3])};
    cursor_ = 0;
    ++position_;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int cursor_ = 2;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mfh
