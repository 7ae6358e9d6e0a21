#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cowsim {

/// SplitMix64 finalizer. Used to derive decorrelated stream seeds from a
/// session seed so that results do not depend on scheduling or worker count.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag,
                                    std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(base) ^ tag) ^ index);
}

// Stream tags for the independent random processes of one session.
namespace seed_tag {
inline constexpr std::uint64_t kSymbols = 0x01;
inline constexpr std::uint64_t kFramePhase = 0x02;
inline constexpr std::uint64_t kPhaseWalk = 0x03;
inline constexpr std::uint64_t kEve = 0x04;
inline constexpr std::uint64_t kApdDd = 0x05;
inline constexpr std::uint64_t kApdDm1 = 0x06;
inline constexpr std::uint64_t kApdDm2 = 0x07;
inline constexpr std::uint64_t kClicksDd = 0x08;
inline constexpr std::uint64_t kClicksDm1 = 0x09;
inline constexpr std::uint64_t kClicksDm2 = 0x0a;
inline constexpr std::uint64_t kSnrAverage = 0x0b;
}  // namespace seed_tag

/// Deterministic generator: mt19937_64 plus hand-rolled uniform/Gaussian
/// transforms, so the sample stream is pinned by the standard (the
/// distributions in <random> are implementation-defined).
class Prng {
 public:
  explicit Prng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; generates pairs, caches the second.
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    double angle = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(angle);
    has_cached_ = true;
    return r * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace cowsim
