#pragma once

#include <limits>
#include <vector>

#include "equil/linop.hpp"
#include "equil/params.hpp"

namespace equil {

/// min_x |A x - b|_2^2 / sqrt(lambda) + sqrt(lambda) |x|_1.
/// This normalization keeps the two terms comparable across lambda and is
/// equivalent to the usual lasso up to the constant factor 2/sqrt(lambda).
struct LassoProblem {
  const LinearOperator* op = nullptr;
  Vec b;
  double lambda = 0.0;
};

double lasso_objective(const LassoProblem& prob, const Vec& x);

struct CcpOptions {
  int max_iters = 1000;
  double tau = 0.0;    // primal step; 0 = auto 0.9 / |K|_2
  double sigma = 0.0;  // dual step; 0 = auto 0.9 / |K|_2
  double theta = 1.0;  // extrapolation
  /// Reference optimal value for gap tracking; NaN disables gap_history.
  double p_star = std::numeric_limits<double>::quiet_NaN();
  /// Stop once (f(x) - p_star) / f(0) <= gap_tol; 0 runs the full budget.
  double gap_tol = 0.0;
};

struct CcpRun {
  Vec x;  // original coordinates
  /// Objective f(x_k) per total iteration, k = 0..; preconditioned runs
  /// spend their first equil_iterations entries at f(0).
  std::vector<double> objective_history;
  /// (f(x_k) - p_star) / f(0); empty when p_star was NaN.
  std::vector<double> gap_history;
  double tau = 0.0, sigma = 0.0, theta = 1.0;
  int iterations = 0;
  int equil_iterations = 0;
  bool reached_tol = false;
  long long apply_count = 0;
  long long adjoint_count = 0;
};

/// First-order primal-dual splitting for the lasso objective: alternate the
/// closed-form dual update for the residual term with the shrinkage step for
/// the l1 term, with extrapolation theta on the primal. One apply and one
/// adjoint per iteration; the objective is tracked with uncharged probes.
CcpRun ccp_lasso(const LassoProblem& prob, const CcpOptions& options = {});

/// Equilibrates A first (charged, a flat prefix in the histories), then runs
/// the same iteration on diag(d) A diag(e) with the substitution x = e .* z:
/// the data term becomes |inv(D) w - b|^2/sqrt(lambda) at w = (DAE) z and the
/// l1 term a weighted norm sqrt(lambda) sum_j e_j |z_j|, so objective values
/// and the reported x always refer to the original problem.
CcpRun ccp_lasso_preconditioned(const LassoProblem& prob,
                                const EquilibrationParams& equil_params,
                                const CcpOptions& options = {});

struct FistaResult {
  Vec x;
  double p_star = 0.0;
  int iterations = 0;
  double grad_map_norm = 0.0;
  bool converged = false;
};

/// Reference solver: accelerated proximal gradient with adaptive restart,
/// run until the prox-gradient mapping norm falls below grad_map_tol.
/// Independent of the primal-dual scheme; used as the optimal-value oracle.
FistaResult lasso_fista(const LassoProblem& prob, double grad_map_tol = 1e-12,
                        int max_iters = 500000);

}  // namespace equil
