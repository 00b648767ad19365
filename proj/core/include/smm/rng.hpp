#pragma once

#include <cstddef>
#include <cstdint>

namespace smm {

/// Mixes a master seed with stream identifiers into an independent 64-bit seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

/// Small splitmix64 generator.
///
/// Every stochastic operation in the library takes one of these explicitly.
/// Distributions are implemented here rather than through <random> so that
/// sampled values are identical across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Standard exponential.
  double exponential();
  /// Standard normal (Box-Muller, no caching).
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// An independent generator for the given stream id.
  [[nodiscard]] Rng derive(std::uint64_t stream) const;

 private:
  std::uint64_t state_;
};

}  // namespace smm
