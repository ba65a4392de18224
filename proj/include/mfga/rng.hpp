#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mfga {

/// Philox4x32 with 10 rounds: a keyed bijection on 128-bit counters.
/// Stateless, so any draw can be produced independently of every other.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57;
  static constexpr std::uint32_t kW0 = 0x9E3779B9;
  static constexpr std::uint32_t kW1 = 0xBB67AE85;
};

/// What a block of random bits is used for. Distinct purposes never share
/// counters, so e.g. adding a bridge test does not perturb the Gaussian draws.
enum class DrawPurpose : std::uint32_t {
  increment = 1,
  bridge = 2,
  initial_state = 3,
  auxiliary = 4,
};

struct StreamId {
  std::uint32_t replication = 0;
  std::uint32_t particle = 0;
};

/// Reproducible random draws keyed by (seed, replication, particle, step).
/// The counter word layout is {step, particle, replication, purpose<<16 | block}.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, StreamId id) : seed_(seed), id_(id) {}

  std::uint64_t seed() const { return seed_; }
  StreamId id() const { return id_; }

  /// Two uniforms on the open interval (0,1) with 53-bit resolution.
  std::array<double, 2> uniform_pair(std::uint32_t step, DrawPurpose purpose,
                                     std::uint32_t block = 0) const {
    const auto out = Philox4x32::apply(
        {step, id_.particle, id_.replication,
         (static_cast<std::uint32_t>(purpose) << 16) | (block & 0xFFFF)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
  }

  double uniform(std::uint32_t step, DrawPurpose purpose, std::uint32_t block = 0) const {
    return uniform_pair(step, purpose, block)[0];
  }

  /// Fills out[0..n) with i.i.d. standard normals (Box-Muller, both branches).
  template <class Out>
  void normals(std::uint32_t step, int n, Out& out,
               DrawPurpose purpose = DrawPurpose::increment) const {
    for (int k = 0; k < n; k += 2) {
      const auto [u1, u2] = uniform_pair(step, purpose, static_cast<std::uint32_t>(k / 2));
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double angle = 2.0 * std::numbers::pi * u2;
      out[k] = r * std::cos(angle);
      if (k + 1 < n) out[k + 1] = r * std::sin(angle);
    }
  }

 private:
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits =
        ((std::uint64_t{hi} << 32) | lo) >> 11;  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t seed_;
  StreamId id_;
};

/// Derives a child seed from a master seed and a label (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t label) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (label + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace mfga
