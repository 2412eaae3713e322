#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

namespace psmcrb {

/// Deterministic random stream: xoshiro256++ seeded through SplitMix64.
///
/// Streams are value types. Copying a stream copies its complete state
/// (including the cached second polar variate), so a copy replays exactly the
/// same draws; this is how common random numbers are obtained.
class Stream {
 public:
  explicit Stream(std::uint64_t seed);

  /// Stream for one (seed, a, b) counter, e.g. (master seed, grid index,
  /// trial index). Independent of how trials are partitioned over workers.
  static Stream keyed(std::uint64_t master, std::uint64_t a, std::uint64_t b);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal by the Marsaglia polar method. Pairs are produced
  /// together and the second member is cached for the next call. This is the
  /// only Gaussian generator in the library.
  double gaussian();

  Eigen::VectorXd gaussian_vector(Eigen::Index n);

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace psmcrb
