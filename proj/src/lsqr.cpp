#include "equil/lsqr.hpp"

#include <cmath>
#include <functional>

#include "equil/equilibrate.hpp"
#include "equil/rng.hpp"
#include "equil/streams.hpp"

namespace equil {

namespace {

// Core recurrence on the (possibly scaled) system B x = c. The residual
// callback maps the current iterate to the original system's relative
// residual without touching the charged operator.
void lsqr_core(const LinearOperator& B, const Vec& c, int max_iters,
               double tol,
               const std::function<double(const Vec&)>& rel_residual,
               LsqrRun& run, Vec& x) {
  x = Vec::Zero(B.cols());

  double beta = c.norm();
  Vec u = c / beta;
  Vec v = B.apply_adjoint(u);
  double alpha = v.norm();
  if (alpha == 0.0) {
    run.breakdown = true;  // B^T c = 0: x = 0 is already optimal
    return;
  }
  v /= alpha;
  Vec w = v;
  double phibar = beta;
  double rhobar = alpha;

  for (int t = 1; t <= max_iters; ++t) {
    bool invariant = false;

    Vec u_next = B.apply(v) - alpha * u;
    beta = u_next.norm();
    if (beta > 0.0) {
      u = u_next / beta;
    } else {
      invariant = true;
    }

    alpha = 0.0;
    if (!invariant) {
      Vec v_next = B.apply_adjoint(u) - beta * v;
      alpha = v_next.norm();
      if (alpha > 0.0) {
        v = v_next / alpha;
      } else {
        invariant = true;
      }
    }

    const double rho = std::hypot(rhobar, beta);
    const double cs = rhobar / rho;
    const double sn = beta / rho;
    const double theta = sn * alpha;
    rhobar = -cs * alpha;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    x += (phi / rho) * w;
    w = v - (theta / rho) * w;

    run.iterations = t;
    const double rel = rel_residual(x);
    run.residual_history.push_back(rel);
    if (rel <= tol) {
      run.reached_tol = true;
      break;
    }
    if (invariant) {
      run.breakdown = true;
      break;
    }
  }
}

}  // namespace

LsqrRun lsqr(const LinearOperator& op, const Vec& b, int max_iters,
             double rel_residual_tol) {
  detail::require(b.size() == op.rows(), "lsqr: rhs length mismatch");
  const double bnorm = b.norm();
  detail::require(bnorm > 0.0, "lsqr: rhs must be nonzero");
  detail::require(max_iters >= 0, "lsqr: max_iters must be nonnegative");

  const CountingOperator counted(op);
  LsqrRun run;
  run.residual_history.push_back(1.0);
  Vec x;
  lsqr_core(counted, b, max_iters, rel_residual_tol,
            [&](const Vec& xk) { return (b - op.apply(xk)).norm() / bnorm; },
            run, x);
  run.x = std::move(x);
  run.apply_count = counted.apply_count();
  run.adjoint_count = counted.adjoint_count();
  return run;
}

LsqrRun lsqr_preconditioned(const LinearOperator& op, const Vec& b,
                            const EquilibrationParams& equil_params,
                            int max_iters, double rel_residual_tol) {
  detail::require(b.size() == op.rows(),
                  "lsqr_preconditioned: rhs length mismatch");
  const double bnorm = b.norm();
  detail::require(bnorm > 0.0, "lsqr_preconditioned: rhs must be nonzero");
  detail::require(max_iters >= 0,
                  "lsqr_preconditioned: max_iters must be nonnegative");

  const CountingOperator counted(op);
  const ScalingResult eq = sgd_equilibrate(counted, equil_params);

  LsqrRun run;
  run.equil_iterations = equil_params.iterations;
  // While the scaling was being learned the solution estimate was zero.
  for (int t = 0; t <= equil_params.iterations; ++t) {
    run.residual_history.push_back(1.0);
  }

  const ScaledOperator scaled(counted, eq.d, eq.e);
  const Vec c = eq.d.cwiseProduct(b);
  Vec x_scaled;
  lsqr_core(scaled, c, max_iters, rel_residual_tol,
            [&](const Vec& xk) {
              const Vec xorig = eq.e.cwiseProduct(xk);
              return (b - op.apply(xorig)).norm() / bnorm;
            },
            run, x_scaled);
  run.x = eq.e.cwiseProduct(x_scaled);
  run.apply_count = counted.apply_count();
  run.adjoint_count = counted.adjoint_count();
  return run;
}

double spectral_norm(const LinearOperator& op, int max_iters, double rel_tol,
                     std::uint64_t seed) {
  detail::require(max_iters > 0, "spectral_norm: max_iters must be positive");
  SeededRng rng(seed, streams::kPowerIteration);
  Vec x(op.cols());
  for (Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
  double xn = x.norm();
  detail::check(xn > 0.0, "spectral_norm: degenerate start");
  x /= xn;
  double lambda = 0.0;
  for (int t = 0; t < max_iters; ++t) {
    const Vec y = op.apply(x);
    const double next = y.squaredNorm();  // Rayleigh quotient of A^T A
    if (next == 0.0) return 0.0;
    const bool settled = std::abs(next - lambda) <= rel_tol * next;
    lambda = next;
    if (settled) break;
    Vec z = op.apply_adjoint(y);
    const double zn = z.norm();
    if (zn == 0.0) break;
    x = z / zn;
  }
  return std::sqrt(lambda);
}

}  // namespace equil
