#pragma once

#include <cstdint>
#include <random>

namespace reminisce {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Purposes that get their own sub-stream of a run's root seed. Adding a
/// consumer of one purpose never shifts the draws seen by another.
enum class StreamPurpose : std::uint64_t {
  ModelGeneration = 1,
  Training = 2,
  GreedyProbe = 3,
  RandomBaseline = 4,
  PolicySelection = 5,
  FinalTraces = 6,
  OracleCheck = 7,
  Custom = 99,
};

/// Seed for sub-stream (purpose, index) of `root`:
/// mix64(mix64(mix64(root) ^ purpose) ^ index).
constexpr std::uint64_t derive_seed(std::uint64_t root, StreamPurpose purpose,
                                    std::uint64_t index = 0) {
  return mix64(mix64(mix64(root) ^ static_cast<std::uint64_t>(purpose)) ^ index);
}

/// Seeded stream with platform-independent output. std::mt19937_64's sequence
/// is fixed by the standard; the std distributions are not, so conversions
/// to doubles and bounded integers are done here.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), by rejection to avoid modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  bool operator==(const RandomStream& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace reminisce
