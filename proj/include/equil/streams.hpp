#pragma once

#include <cstdint>

namespace equil {

/// Registry of RNG stream ids. Every consumer of a user seed derives its own
/// stream so draw counts never couple across components; keep these distinct.
namespace streams {
constexpr std::uint64_t kMatrixPositions = 0;
constexpr std::uint64_t kMatrixValues = 1;
constexpr std::uint64_t kRowScales = 2;
constexpr std::uint64_t kColScales = 3;
constexpr std::uint64_t kSolution = 7;
constexpr std::uint64_t kNoise = 8;
constexpr std::uint64_t kSparsity = 9;
constexpr std::uint64_t kSgdProbes = 17;
constexpr std::uint64_t kSymmetryCheck = 18;
constexpr std::uint64_t kPowerIteration = 19;
}  // namespace streams

}  // namespace equil
