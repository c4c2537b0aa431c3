#include "equil/rng.hpp"

#include <cmath>

namespace equil {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream) {
  // Mix seed and stream through splitmix64 so that nearby seeds and streams
  // land far apart in mt19937_64's state space.
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64(state);
  state ^= stream * 0xD1B54A32D192ED03ULL + 0x2545F4914F6CDD1DULL;
  mixed ^= splitmix64(state);
  engine_.seed(mixed);
}

std::uint64_t SeededRng::next_u64() { return engine_(); }

double SeededRng::uniform01() {
  // 53 mantissa bits, offset by half an ulp so 0 and 1 are excluded.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double SeededRng::sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1 = uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 6.283185307179586476925286766559 * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t SeededRng::uniform_index(std::uint64_t n) {
  detail::require(n > 0, "uniform_index: n must be positive");
  // Rejection-free multiply-shift would bias tiny ranges differently across
  // platforms; plain modulo is deterministic and the bias is irrelevant here.
  return next_u64() % n;
}

Vec rademacher(Index dim, SeededRng& rng) {
  detail::require(dim >= 0, "rademacher: negative dimension");
  Vec s(dim);
  for (Index i = 0; i < dim; ++i) s[i] = rng.sign();
  return s;
}

}  // namespace equil
