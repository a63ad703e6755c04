#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace isovar {

/// Seeded pseudo-random stream. Streams with the same (seed, stream id) are
/// identical; different stream ids give statistically independent streams.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Fresh stream derived from this generator's seed, independent of how far
  /// this stream has advanced.
  Rng substream(std::uint64_t stream) const { return Rng(seed_, stream_ * 0x9E3779B97F4A7C15ULL + stream + 1); }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double normal() { return normal_(*this); }
  /// Standard exponential.
  double exponential();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Mixes a base seed with a tag (SplitMix64 finalizer) so that independent
/// pipeline stages get unrelated seeds from one user seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace isovar
