#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nlg {

/// Deterministic random stream. Every stream is identified by (seed, name,
/// index) so that parallel schedules reproduce the same draws: round i of a
/// Monte Carlo run always gets stream (seed, "round", i) no matter which
/// worker executes it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  static Rng stream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the stream name
    for (unsigned char c : name) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return Rng(mix(seed ^ mix(h + 0x9e3779b97f4a7c15ULL * (index + 1))));
  }

  /// Child stream derived from this one's next draw.
  Rng split(std::uint64_t tag) { return Rng(mix(next() ^ mix(tag + 1))); }

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n) by rejection; n must be positive.
  std::uint64_t below(std::uint64_t n) {
    if ((n & (n - 1)) == 0) return next() & (n - 1);
    const std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % n);
    for (;;) {
      std::uint64_t x = next();
      if (x < limit) return x % n;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  bool bit() { return (next() >> 63) != 0; }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace nlg
