#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace eharq {

// SplitMix64 step; used to expand seeds and to hash stream identifiers.
constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ generator. Counter-style substreams are derived by hashing
// (seed, tag, index) through SplitMix64, so any record or process can own an
// independent stream regardless of generation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64_next(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Unbiased integer in [0, bound) via rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller; the second deviate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Independent stream for (master_seed, tag, index).
inline Rng substream(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t index) {
  std::uint64_t s = master_seed;
  std::uint64_t mix = splitmix64_next(s);
  s ^= tag + 0x9e3779b97f4a7c15ULL + (mix << 6);
  mix = splitmix64_next(s);
  s ^= index + 0x9e3779b97f4a7c15ULL + (mix << 6);
  return Rng(splitmix64_next(s));
}

// Stream tags used across the toolkit; distinct values keep substreams disjoint.
namespace stream_tag {
inline constexpr std::uint64_t kRecord = 0x7265636f72645f31ULL;
inline constexpr std::uint64_t kFading = 0x66616465636861ULL;
inline constexpr std::uint64_t kCalibration = 0x63616c6962ULL;
inline constexpr std::uint64_t kTraining = 0x747261696eULL;
inline constexpr std::uint64_t kMonteCarlo = 0x6d63686172ULL;
inline constexpr std::uint64_t kSystemSim = 0x73797373696dULL;
inline constexpr std::uint64_t kCode = 0x636f6465ULL;
}  // namespace stream_tag

}  // namespace eharq
