#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "equil/estimator.hpp"
#include "equil/explicit_matrix.hpp"
#include "equil/linop.hpp"
#include "equil/params.hpp"
#include "equil/rng.hpp"

namespace equil {

/// Regularized equilibration objective
///   f(u, v) = 1/2 sum_ij A_ij^2 e^{2 u_i + 2 v_j}
///             - alpha^2 1^T u - beta^2 1^T v
///             + gamma / 2 (|u|^2 + |v|^2),
/// minimized over the box |u_i| <= M, |v_j| <= M. Strongly convex with
/// parameter gamma; its unconstrained stationarity condition says every row
/// norm of diag(e^u) A diag(e^v) is alpha and every column norm is beta, up
/// to the gamma * u correction.
double objective(const ExplicitMatrix& A, const Vec& u, const Vec& v,
                 const EquilibrationParams& params);

/// Exact gradient of the objective:
///   grad_u = |D A E|^2 1 - alpha^2 1 + gamma u, D = diag(e^u), E = diag(e^v)
/// and symmetrically for v with the transpose.
void gradient(const ExplicitMatrix& A, const Vec& u, const Vec& v,
              const EquilibrationParams& params, Vec& grad_u, Vec& grad_v);

/// Generalized forms with per-coordinate linear terms lin_u, lin_v in place
/// of alpha^2 1, beta^2 1; the variant solvers and their oracles share these.
double objective_weighted(const ExplicitMatrix& A, const Vec& u, const Vec& v,
                          const Vec& lin_u, const Vec& lin_v, double gamma);
void gradient_weighted(const ExplicitMatrix& A, const Vec& u, const Vec& v,
                       const Vec& lin_u, const Vec& lin_v, double gamma,
                       Vec& grad_u, Vec& grad_v);

/// Matrix-free one-sample gradient estimate: |D A E s|^2 and |E A^T D w|^2
/// replace the exact row and column norms, with fresh Rademacher probes
/// s, w. Unbiased, and costs one apply plus one adjoint apply.
void stochastic_gradient_estimate(const LinearOperator& op, const Vec& u,
                                  const Vec& v, const EquilibrationParams& params,
                                  SeededRng& rng, Vec& g_u, Vec& g_v);

/// Euclidean projection onto [-bound, bound]^dim.
Vec project_box(const Vec& x, double bound);

/// One diagnostics row, evaluated at the averaged iterate.
struct IterationRecord {
  int iter = 0;
  std::optional<double> objective;
  std::optional<double> rms;
  std::optional<double> cond;
};

/// Optional per-iteration diagnostics. `matrix` must outlive the call and be
/// the explicit form of the operator being equilibrated; diagnostics are
/// evaluated by entrywise access and are not charged to the matvec budget.
/// Rows are recorded at iterations 0, stride, 2*stride, ...; condition
/// numbers additionally require iter % cond_stride == 0 (0 disables them).
struct DiagnosticsConfig {
  const ExplicitMatrix* matrix = nullptr;
  int stride = 1;
  int cond_stride = 0;
};

struct ScalingResult {
  Vec u, v;  // averaged log scalings
  Vec d, e;  // exp(u), exp(v)
  double alpha = 0.0, beta = 0.0;  // resolved targets (0 when not uniform)
  std::vector<IterationRecord> history;
  bool box_feasible = true;      // every iterate stayed inside the box
  bool iterate_bound_ok = true;  // every iterate obeyed x_i <= lin_i / gamma
  long long apply_count = 0;
  long long adjoint_count = 0;
};

/// Projected stochastic gradient equilibration. Starting from u = v = 0,
/// iteration t (t = 1..T) takes step 2 / (gamma (t + 1)) along the one-sample
/// gradient estimate at the previous iterate, projects onto the box, and
/// folds the result into a running average with weight 2 / (t + 2). The
/// averaged iterate is the output; its implicit weights 2(t+1)/((T+1)(T+2))
/// give the O(1/T) expected-suboptimality guarantee of averaged SGD under
/// strong convexity.
///
/// Budget: exactly T applies and T adjoint applies of `op`.
ScalingResult sgd_equilibrate(const LinearOperator& op,
                              const EquilibrationParams& params,
                              const DiagnosticsConfig& diag = {});

// ---------------------------------------------------------------------------
// Generic engine. The four problem shapes (row/column, symmetric, block,
// tensor) differ only in how many blocks of log-scales they carry, the linear
// term of each block, and how the squared-norm estimates are produced; one
// engine runs them all so the reduction identities between variants hold bit
// for bit.

struct SgdBlock {
  Index dim;
  Vec lin;  // linear coefficient per coordinate (e.g. alpha^2 for rows)
};

/// Fills est[b] with the one-sample squared-norm estimate for block b, given
/// the previous iterates' log scalings. Must consume rng in a fixed order.
using SgdEstimator = std::function<void(
    const std::vector<Vec>& log_scales, SeededRng& rng, std::vector<Vec>& est)>;

struct SgdOutcome {
  std::vector<Vec> average;
  bool box_feasible = true;
  bool iterate_bound_ok = true;
};

/// `on_iteration(t, averages)` fires once with t = 0 before the first step
/// and after every step with t = 1..T.
SgdOutcome run_projected_sgd(
    const std::vector<SgdBlock>& blocks, const SgdEstimator& estimator,
    double gamma, double max_log_scale, int iterations, SeededRng& rng,
    const std::function<void(int, const std::vector<Vec>&)>& on_iteration = {});

namespace internal {

/// Row/column equilibration with per-coordinate targets; sgd_equilibrate and
/// the targets variant are thin wrappers over this single code path.
/// alpha_for_rms / beta_for_rms feed the RMS diagnostic when the targets are
/// uniform; pass 0 to skip it.
ScalingResult sgd_row_col(const LinearOperator& op, Vec lin_u, Vec lin_v,
                          const EquilibrationParams& params,
                          const DiagnosticsConfig& diag, double alpha_for_rms,
                          double beta_for_rms);

}  // namespace internal

}  // namespace equil
