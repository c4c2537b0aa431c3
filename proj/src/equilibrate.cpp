#include "equil/equilibrate.hpp"

#include <cmath>

#include "equil/metrics.hpp"
#include "equil/streams.hpp"

namespace equil {

double objective_weighted(const ExplicitMatrix& A, const Vec& u, const Vec& v,
                          const Vec& lin_u, const Vec& lin_v, double gamma) {
  detail::require(u.size() == A.rows() && v.size() == A.cols(),
                  "objective: scaling length mismatch");
  double quad = 0.0;
  // Zero entries contribute nothing even when the exponential overflows.
  A.for_each_entry([&](Index i, Index j, double a) {
    if (a == 0.0) return;
    quad += a * a * std::exp(2.0 * (u[i] + v[j]));
  });
  return 0.5 * quad - lin_u.dot(u) - lin_v.dot(v) +
         0.5 * gamma * (u.squaredNorm() + v.squaredNorm());
}

void gradient_weighted(const ExplicitMatrix& A, const Vec& u, const Vec& v,
                       const Vec& lin_u, const Vec& lin_v, double gamma,
                       Vec& grad_u, Vec& grad_v) {
  detail::require(u.size() == A.rows() && v.size() == A.cols(),
                  "gradient: scaling length mismatch");
  grad_u = Vec::Zero(A.rows());
  grad_v = Vec::Zero(A.cols());
  A.for_each_entry([&](Index i, Index j, double a) {
    if (a == 0.0) return;
    const double t = a * a * std::exp(2.0 * (u[i] + v[j]));
    grad_u[i] += t;
    grad_v[j] += t;
  });
  grad_u += gamma * u - lin_u;
  grad_v += gamma * v - lin_v;
}

double objective(const ExplicitMatrix& A, const Vec& u, const Vec& v,
                 const EquilibrationParams& params) {
  validate_params(params);
  const auto [alpha, beta] = resolve_targets(params, A.rows(), A.cols());
  return objective_weighted(A, u, v,
                            Vec::Constant(A.rows(), alpha * alpha),
                            Vec::Constant(A.cols(), beta * beta),
                            params.gamma);
}

void gradient(const ExplicitMatrix& A, const Vec& u, const Vec& v,
              const EquilibrationParams& params, Vec& grad_u, Vec& grad_v) {
  validate_params(params);
  const auto [alpha, beta] = resolve_targets(params, A.rows(), A.cols());
  gradient_weighted(A, u, v, Vec::Constant(A.rows(), alpha * alpha),
                    Vec::Constant(A.cols(), beta * beta), params.gamma,
                    grad_u, grad_v);
}

void stochastic_gradient_estimate(const LinearOperator& op, const Vec& u,
                                  const Vec& v,
                                  const EquilibrationParams& params,
                                  SeededRng& rng, Vec& g_u, Vec& g_v) {
  validate_params(params);
  const auto [alpha, beta] = resolve_targets(params, op.rows(), op.cols());
  const ScaledOperator scaled(op, u.array().exp(), v.array().exp());
  const AdjointOperator adj(scaled);
  g_u = estimate_row_norms_sq(scaled, rng);
  g_v = estimate_row_norms_sq(adj, rng);
  g_u.array() += -alpha * alpha + params.gamma * u.array();
  g_v.array() += -beta * beta + params.gamma * v.array();
}

Vec project_box(const Vec& x, double bound) {
  detail::require(bound >= 0.0, "project_box: bound must be nonnegative");
  return x.cwiseMax(-bound).cwiseMin(bound);
}

SgdOutcome run_projected_sgd(
    const std::vector<SgdBlock>& blocks, const SgdEstimator& estimator,
    double gamma, double max_log_scale, int iterations, SeededRng& rng,
    const std::function<void(int, const std::vector<Vec>&)>& on_iteration) {
  detail::require(gamma > 0.0, "run_projected_sgd: gamma must be positive");
  detail::require(max_log_scale > 0.0,
                  "run_projected_sgd: max_log_scale must be positive");
  detail::require(iterations >= 0,
                  "run_projected_sgd: iterations must be nonnegative");
  const std::size_t nblocks = blocks.size();
  const double M = max_log_scale;

  std::vector<Vec> x(nblocks), avg(nblocks), est(nblocks);
  for (std::size_t b = 0; b < nblocks; ++b) {
    detail::require(blocks[b].dim > 0 && blocks[b].lin.size() == blocks[b].dim,
                    "run_projected_sgd: malformed block");
    x[b] = Vec::Zero(blocks[b].dim);
    avg[b] = Vec::Zero(blocks[b].dim);
  }

  SgdOutcome out;
  if (on_iteration) on_iteration(0, avg);

  for (int t = 1; t <= iterations; ++t) {
    // Every block's estimate is taken at the previous iterate before any
    // block moves; the two (or three) scaling families update in lockstep.
    estimator(x, rng, est);
    const double step = 2.0 / (gamma * (t + 1));
    const double avg_weight = 2.0 / (t + 2.0);
    for (std::size_t b = 0; b < nblocks; ++b) {
      Vec& xb = x[b];
      const Vec& lin = blocks[b].lin;
      detail::check(est[b].size() == blocks[b].dim,
                    "run_projected_sgd: estimator returned wrong size");
      for (Index i = 0; i < xb.size(); ++i) {
        const double g = est[b][i] - lin[i] + gamma * xb[i];
        double xi = xb[i] - step * g;
        xi = std::min(std::max(xi, -M), M);
        xb[i] = xi;

        // The iterates never exceed lin_i / gamma: the quadratic term of the
        // estimate is nonnegative, so the step can push x_i at most to the
        // unregularized cap, and the cap is preserved inductively.
        const double cap = lin[i] / gamma;
        if (xi > cap + 1e-9 * std::max(1.0, std::abs(cap))) {
          out.iterate_bound_ok = false;
        }
        if (std::abs(xi) > M) out.box_feasible = false;
      }
      avg[b] = avg_weight * xb + (1.0 - avg_weight) * avg[b];
    }
    if (on_iteration) on_iteration(t, avg);
  }
  out.average = std::move(avg);
  return out;
}

namespace internal {

ScalingResult sgd_row_col(const LinearOperator& op, Vec lin_u, Vec lin_v,
                          const EquilibrationParams& params,
                          const DiagnosticsConfig& diag, double alpha_for_rms,
                          double beta_for_rms) {
  validate_params(params);
  const Index m = op.rows();
  const Index n = op.cols();
  detail::require(lin_u.size() == m && lin_v.size() == n,
                  "sgd_row_col: linear term length mismatch");
  if (diag.matrix != nullptr) {
    detail::require(diag.matrix->rows() == m && diag.matrix->cols() == n,
                    "sgd_row_col: diagnostics matrix shape mismatch");
    detail::require(diag.stride > 0, "sgd_row_col: stride must be positive");
  }

  const CountingOperator counted(op);
  SeededRng rng(params.seed, streams::kSgdProbes);

  std::vector<SgdBlock> blocks(2);
  blocks[0] = {m, std::move(lin_u)};
  blocks[1] = {n, std::move(lin_v)};

  const auto estimator = [&](const std::vector<Vec>& logs, SeededRng& r,
                             std::vector<Vec>& est) {
    const ScaledOperator scaled(counted, logs[0].array().exp(),
                                logs[1].array().exp());
    const AdjointOperator adj(scaled);
    est[0] = estimate_row_norms_sq(scaled, r);
    est[1] = estimate_row_norms_sq(adj, r);
  };

  ScalingResult result;
  result.alpha = alpha_for_rms;
  result.beta = beta_for_rms;

  std::function<void(int, const std::vector<Vec>&)> on_iter;
  if (diag.matrix != nullptr) {
    on_iter = [&](int t, const std::vector<Vec>& avg) {
      if (t != 0 && t % diag.stride != 0) return;
      IterationRecord rec;
      rec.iter = t;
      rec.objective = objective_weighted(*diag.matrix, avg[0], avg[1],
                                         blocks[0].lin, blocks[1].lin,
                                         params.gamma);
      if (alpha_for_rms > 0.0 && beta_for_rms > 0.0) {
        rec.rms = rms_error(*diag.matrix, avg[0], avg[1], alpha_for_rms,
                            beta_for_rms);
      }
      if (diag.cond_stride > 0 && t % diag.cond_stride == 0 &&
          diag.matrix->rows() == diag.matrix->cols()) {
        const Vec d = avg[0].array().exp();
        const Vec e = avg[1].array().exp();
        rec.cond = condition_number(
            ExplicitMatrix::dense(diag.matrix->scaled_dense(d, e)));
      }
      result.history.push_back(std::move(rec));
    };
  }

  SgdOutcome outcome =
      run_projected_sgd(blocks, estimator, params.gamma, params.max_log_scale,
                        params.iterations, rng, on_iter);

  result.u = std::move(outcome.average[0]);
  result.v = std::move(outcome.average[1]);
  result.d = result.u.array().exp();
  result.e = result.v.array().exp();
  result.box_feasible = outcome.box_feasible;
  result.iterate_bound_ok = outcome.iterate_bound_ok;
  result.apply_count = counted.apply_count();
  result.adjoint_count = counted.adjoint_count();
  return result;
}

}  // namespace internal

ScalingResult sgd_equilibrate(const LinearOperator& op,
                              const EquilibrationParams& params,
                              const DiagnosticsConfig& diag) {
  const auto [alpha, beta] = resolve_targets(params, op.rows(), op.cols());
  return internal::sgd_row_col(
      op, Vec::Constant(op.rows(), alpha * alpha),
      Vec::Constant(op.cols(), beta * beta), params, diag, alpha, beta);
}

}  // namespace equil
