#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace cml {

/// Derives an independent 64-bit seed for substream `stream` of `seed`.
///
/// Two rounds of the SplitMix64 finalizer are applied to the pair, so
/// neighbouring (seed, stream) combinations land far apart. Every Monte Carlo
/// loop in the library draws sample `i` from `Rng(mix_seed(seed, i))`, which
/// keeps results independent of evaluation order.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator with a documented, platform-stable output sequence.
///
/// The engine is std::mt19937_64 (whose sequence is fixed by the standard)
/// seeded with `mix_seed(seed, 0)`. Uniforms take the top 53 bits of each
/// draw; normals use the Box-Muller transform and return the cosine branch
/// first, then the cached sine branch. std::normal_distribution is avoided
/// because its algorithm differs between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform();

  /// Standard normal.
  double normal();

  /// Uniform integer in [0, n) without modulo bias. Requires n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Fisher-Yates shuffle of 0..n-1 driven by `rng`.
std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

/// rows x cols matrix of standard normals, filled row by row.
Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace cml
