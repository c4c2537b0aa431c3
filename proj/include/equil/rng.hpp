#pragma once

#include <cstdint>
#include <random>

#include "equil/common.hpp"

namespace equil {

/// Deterministic pseudo-random source. A given (seed, stream) pair produces
/// the same sequence on every platform: mt19937_64 output is pinned by the
/// standard, and the real-valued draws below avoid std::*_distribution, whose
/// algorithms are implementation-defined.
///
/// Streams let one master seed drive several independent consumers (matrix
/// positions, values, probe signs, ...) without coupling their draw counts.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1).
  double uniform01();

  /// -1.0 or +1.0 with equal probability.
  double sign();

  /// Standard normal via Box-Muller (two uniforms per pair, one cached).
  double normal();

  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Vector of `dim` IID entries from {-1, +1}.
Vec rademacher(Index dim, SeededRng& rng);

}  // namespace equil
