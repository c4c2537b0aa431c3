#include "equil/params.hpp"

#include <cmath>

namespace equil {

ResolvedTargets resolve_targets(const EquilibrationParams& params, Index rows,
                                Index cols) {
  detail::require(rows > 0 && cols > 0,
                  "resolve_targets: dimensions must be positive");
  detail::require(params.alpha >= 0.0 && params.beta >= 0.0,
                  "resolve_targets: targets must be positive (or 0 for auto)");
  const double m = static_cast<double>(rows);
  const double n = static_cast<double>(cols);

  double alpha = params.alpha;
  double beta = params.beta;
  if (alpha == EquilibrationParams::kAutoTarget &&
      beta == EquilibrationParams::kAutoTarget) {
    alpha = std::pow(n / m, 0.25);
    beta = std::pow(m / n, 0.25);
  } else if (beta == EquilibrationParams::kAutoTarget) {
    beta = alpha * std::sqrt(m / n);
  } else if (alpha == EquilibrationParams::kAutoTarget) {
    alpha = beta * std::sqrt(n / m);
  } else {
    const double lhs = m * alpha * alpha;
    const double rhs = n * beta * beta;
    detail::require(std::abs(lhs - rhs) <= 1e-8 * std::max(lhs, rhs),
                    "resolve_targets: m*alpha^2 == n*beta^2 violated");
  }
  return {alpha, beta};
}

void validate_params(const EquilibrationParams& params) {
  detail::require(params.gamma > 0.0, "params: gamma must be positive");
  detail::require(params.max_log_scale > 0.0,
                  "params: max_log_scale must be positive");
  detail::require(params.iterations >= 0,
                  "params: iterations must be nonnegative");
  detail::require(std::isfinite(params.gamma) &&
                      std::isfinite(params.max_log_scale),
                  "params: gamma and max_log_scale must be finite");
}

}  // namespace equil
