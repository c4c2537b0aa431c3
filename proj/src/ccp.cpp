#include "equil/ccp.hpp"

#include <cmath>

#include "equil/equilibrate.hpp"
#include "equil/lsqr.hpp"

namespace equil {

namespace {

void validate_problem(const LassoProblem& prob) {
  detail::require(prob.op != nullptr, "lasso: operator must be set");
  detail::require(prob.b.size() == prob.op->rows(),
                  "lasso: rhs length mismatch");
  detail::require(prob.lambda > 0.0, "lasso: lambda must be positive");
  detail::require(prob.b.norm() > 0.0, "lasso: rhs must be nonzero");
}

double soft_threshold(double q, double thresh) {
  if (q > thresh) return q - thresh;
  if (q < -thresh) return q + thresh;
  return 0.0;
}

// Single iteration path shared by the plain and preconditioned entry points;
// plain runs are the special case d = e = 1 with a zero equilibration prefix.
CcpRun ccp_core(const LassoProblem& prob, const CountingOperator& counted,
                const Vec& d, const Vec& e, int equil_iters,
                const CcpOptions& options) {
  const double lambda = prob.lambda;
  const double sqrt_lambda = std::sqrt(lambda);
  const Index m = prob.op->rows();
  const Index n = prob.op->cols();

  CcpRun run;
  run.equil_iterations = equil_iters;
  run.theta = options.theta;

  const ScaledOperator K(counted, d, e);
  if (options.tau > 0.0 && options.sigma > 0.0) {
    run.tau = options.tau;
    run.sigma = options.sigma;
  } else {
    // Step sizes need |diag(d) A diag(e)|_2; estimate it on an uncharged
    // view so setup does not distort the per-iteration accounting.
    const ScaledOperator K_uncharged(*prob.op, d, e);
    const double norm2 = spectral_norm(K_uncharged, 100, 1e-9, 0);
    detail::check(norm2 > 0.0, "ccp_lasso: zero operator");
    run.tau = 0.9 / norm2;
    run.sigma = 0.9 / norm2;
  }

  const double f0 = lasso_objective(prob, Vec::Zero(n));
  const bool track_gap = std::isfinite(options.p_star);
  const auto push = [&](double f) {
    run.objective_history.push_back(f);
    if (track_gap) run.gap_history.push_back((f - options.p_star) / f0);
  };
  for (int t = 0; t <= equil_iters; ++t) push(f0);
  if (track_gap && options.gap_tol > 0.0 &&
      run.gap_history.back() <= options.gap_tol) {
    run.reached_tol = true;
  }

  Vec y = Vec::Zero(m);
  Vec z = Vec::Zero(n);  // primal in scaled coordinates
  Vec z_tilde = z;

  for (int t = 1; t <= options.max_iters && !run.reached_tol; ++t) {
    // Dual: prox of the conjugate of |inv(D) w - b|^2 / sqrt(lambda).
    const Vec y_hat = y + run.sigma * K.apply(z_tilde);
    for (Index i = 0; i < m; ++i) {
      y[i] = (y_hat[i] - run.sigma * d[i] * prob.b[i]) /
             (1.0 + 0.5 * run.sigma * d[i] * d[i] * sqrt_lambda);
    }

    // Primal: weighted shrinkage, threshold tau * sqrt(lambda) * e_j.
    const Vec g = K.apply_adjoint(y);
    Vec z_next(n);
    for (Index j = 0; j < n; ++j) {
      z_next[j] =
          soft_threshold(z[j] - run.tau * g[j], run.tau * sqrt_lambda * e[j]);
    }
    z_tilde = z_next + run.theta * (z_next - z);
    z = std::move(z_next);

    run.iterations = t;
    const Vec x = e.cwiseProduct(z);
    const double f = lasso_objective(prob, x);  // uncharged probe
    push(f);
    if (track_gap && options.gap_tol > 0.0 &&
        run.gap_history.back() <= options.gap_tol) {
      run.reached_tol = true;
    }
  }

  run.x = e.cwiseProduct(z);
  run.apply_count = counted.apply_count();
  run.adjoint_count = counted.adjoint_count();
  return run;
}

}  // namespace

double lasso_objective(const LassoProblem& prob, const Vec& x) {
  detail::require(prob.op != nullptr && prob.lambda > 0.0,
                  "lasso_objective: malformed problem");
  detail::require(x.size() == prob.op->cols(),
                  "lasso_objective: x length mismatch");
  const double sqrt_lambda = std::sqrt(prob.lambda);
  const Vec r = prob.op->apply(x) - prob.b;
  return r.squaredNorm() / sqrt_lambda + sqrt_lambda * x.lpNorm<1>();
}

CcpRun ccp_lasso(const LassoProblem& prob, const CcpOptions& options) {
  validate_problem(prob);
  detail::require(options.max_iters >= 0,
                  "ccp_lasso: max_iters must be nonnegative");
  const CountingOperator counted(*prob.op);
  return ccp_core(prob, counted, Vec::Ones(prob.op->rows()),
                  Vec::Ones(prob.op->cols()), 0, options);
}

CcpRun ccp_lasso_preconditioned(const LassoProblem& prob,
                                const EquilibrationParams& equil_params,
                                const CcpOptions& options) {
  validate_problem(prob);
  detail::require(options.max_iters >= 0,
                  "ccp_lasso_preconditioned: max_iters must be nonnegative");
  const CountingOperator counted(*prob.op);
  const ScalingResult eq = sgd_equilibrate(counted, equil_params);
  return ccp_core(prob, counted, eq.d, eq.e, equil_params.iterations, options);
}

FistaResult lasso_fista(const LassoProblem& prob, double grad_map_tol,
                        int max_iters) {
  validate_problem(prob);
  const LinearOperator& A = *prob.op;
  const Index n = A.cols();
  const double sqrt_lambda = std::sqrt(prob.lambda);

  // Smooth part h(x) = |Ax - b|^2 / sqrt(lambda) has gradient
  // (2 / sqrt(lambda)) A^T (Ax - b) and curvature 2 sigma_max^2/sqrt(lambda).
  const double sigma_max = spectral_norm(A, 300, 1e-12, 1);
  detail::check(sigma_max > 0.0, "lasso_fista: zero operator");
  const double L = 1.02 * 2.0 * sigma_max * sigma_max / sqrt_lambda;
  const double shrink = sqrt_lambda / L;

  // The explicit return type matters: scalar * vector is a lazy expression
  // that would otherwise be returned still referencing the freed temporary
  // from apply_adjoint.
  const auto smooth_grad = [&](const Vec& point) -> Vec {
    return (2.0 / sqrt_lambda) * A.apply_adjoint(A.apply(point) - prob.b);
  };
  const auto prox_step = [&](const Vec& point, const Vec& grad) {
    Vec out(n);
    for (Index j = 0; j < n; ++j) {
      out[j] = soft_threshold(point[j] - grad[j] / L, shrink);
    }
    return out;
  };

  FistaResult res;
  Vec x = Vec::Zero(n);
  Vec y = x;
  double tk = 1.0;

  for (int it = 1; it <= max_iters; ++it) {
    const Vec grad_y = smooth_grad(y);
    const Vec x_next = prox_step(y, grad_y);

    // Adaptive restart: kill momentum when it points against progress.
    if ((y - x_next).dot(x_next - x) > 0.0) {
      tk = 1.0;
      y = x_next;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      y = x_next + ((tk - 1.0) / t_next) * (x_next - x);
      tk = t_next;
    }
    x = x_next;
    res.iterations = it;

    if (it % 10 == 0 || it == max_iters) {
      // Gradient-map displacement per coordinate, evaluated branch by branch:
      // on the linear branches of the soft threshold it is (g_j +- sqrt
      // lambda) / L exactly, so no cancellation between x and prox(x - g/L)
      // can fake a zero once steps drop below one ulp of large coordinates.
      const Vec gx = smooth_grad(x);
      double sq = 0.0;
      for (Index j = 0; j < n; ++j) {
        const double arg = x[j] - gx[j] / L;
        double dj;
        if (arg > shrink) {
          dj = gx[j] / L + shrink;
        } else if (arg < -shrink) {
          dj = gx[j] / L - shrink;
        } else {
          dj = x[j];
        }
        sq += dj * dj;
      }
      res.grad_map_norm = L * std::sqrt(sq);
      if (res.grad_map_norm <= grad_map_tol) {
        res.converged = true;
        break;
      }
    }
  }
  res.x = x;
  res.p_star = lasso_objective(prob, x);
  return res;
}

}  // namespace equil
