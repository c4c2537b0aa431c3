#pragma once

#include <cstdint>

#include "equil/common.hpp"

namespace equil {

/// Target row / column norms plus the knobs of the regularized problem.
/// alpha or beta equal to kAutoTarget means "derive from the shape": the
/// defaults alpha = (n/m)^{1/4}, beta = (m/n)^{1/4} put the scaled matrix's
/// Frobenius norm near sqrt(min(m, n)) and always satisfy the consistency
/// condition m alpha^2 = n beta^2.
struct EquilibrationParams {
  static constexpr double kAutoTarget = 0.0;

  double alpha = kAutoTarget;
  double beta = kAutoTarget;
  double gamma = 0.1;                       // regularization weight
  double max_log_scale = 9.210340371976184; // log(1e4); box half-width M
  int iterations = 1000;                    // stochastic iteration budget T
  std::uint64_t seed = 0;
};

struct ResolvedTargets {
  double alpha;
  double beta;
};

/// Fills in automatic targets and enforces m alpha^2 = n beta^2 (relative
/// tolerance 1e-8) when both were given. Supplying only one target derives
/// the other from the consistency condition.
ResolvedTargets resolve_targets(const EquilibrationParams& params, Index rows,
                                Index cols);

/// Basic sanity checks shared by every solver entry point.
void validate_params(const EquilibrationParams& params);

}  // namespace equil
