#pragma once

#include <vector>

#include "equil/equilibrate.hpp"
#include "equil/explicit_matrix.hpp"
#include "equil/params.hpp"
#include "equil/variants.hpp"

namespace equil {

/// Principal branch of the Lambert W function on [0, inf):
/// the unique w >= 0 with w e^w = x.
double lambert_w(double x);

/// W(e^y) without forming e^y, i.e. the w > 0 solving w + log w = y.
/// Stable for exponents far beyond overflow; lambert_w(x) is implemented as
/// lambert_w_exp(log x). y = -inf returns 0.
double lambert_w_exp(double y);

struct SinkhornResult {
  Vec d, e;
  int iterations = 0;
  bool converged = false;
  double final_rms = 0.0;
};

/// Classic alternating scaling: with E fixed, each row scaling gets the
/// closed form d_i = alpha / sqrt(sum_j A_ij^2 e_j^2), then symmetrically
/// for e with D fixed. Exact block minimization of the unregularized
/// objective, so the iteration is monotone; converged means the RMS norm
/// deviation dropped to `tol`. Errors on a structurally zero row or column.
/// The split between d and e is not pinned by the problem (d, e) ->
/// (theta d, e / theta) leaves the scaled matrix unchanged; this routine
/// returns the raw alternation output, see balance_scalings.
SinkhornResult sinkhorn_knopp(const ExplicitMatrix& A, double alpha,
                              double beta, int max_iters, double tol);

/// Rebalances the gauge freedom: multiplies d and divides e by the scalar
/// that equates their geometric means. diag(d) A diag(e) is unchanged.
void balance_scalings(Vec& d, Vec& e);

struct BlockMinResult {
  Vec u, v;
  int sweeps = 0;
  bool converged = false;
  double projected_grad_norm = 0.0;
  std::vector<double> objective_trace;  // after every full sweep
};

/// Exact alternating minimization of the regularized box-constrained
/// objective. With v fixed, each u_i has a closed-form minimizer: writing
/// cap = lin_i / gamma and sigma_i = sum_j A_ij^2 e^{2 v_j}, stationarity
/// sigma_i e^{2 u_i} - lin_i + gamma u_i = 0 solves to
///   u_i = cap - W((2 sigma_i / gamma) e^{2 cap}) / 2,
/// evaluated in the log domain and clamped to [-M, M]. Monotone in the
/// objective; converges linearly. The convergence measure is the norm of
/// the unit-step projected gradient.
BlockMinResult regularized_block_min(const ExplicitMatrix& A,
                                     const EquilibrationParams& params,
                                     int max_sweeps = 50000,
                                     double tol = 1e-12);

/// Generalized form with per-coordinate linear terms; the targets-variant
/// oracle, and the uniform case delegates here.
BlockMinResult regularized_block_min_weighted(const ExplicitMatrix& A,
                                              const Vec& lin_u,
                                              const Vec& lin_v, double gamma,
                                              double max_log_scale,
                                              int max_sweeps = 50000,
                                              double tol = 1e-12);

/// Block-variant oracle: rows (columns) in a block share one scaling, and
/// the block's closed-form update uses the aggregated sigma and linear term.
BlockMinResult regularized_block_min_blocks(const ExplicitMatrix& A,
                                            const BlockStructure& structure,
                                            const EquilibrationParams& params,
                                            int max_sweeps = 50000,
                                            double tol = 1e-12);

/// Symmetric-variant oracle: cyclic coordinate minimization of
///   1/4 sum_ij A_ij^2 e^{2u_i + 2u_j} - alpha^2 1^T u + gamma/2 |u|^2
/// over the box. Each coordinate solve is a safeguarded Newton on the
/// strictly increasing derivative  A_kk^2 e^{4t} + s_k e^{2t} - alpha^2
/// + gamma t  with s_k = sum_{j != k} A_kj^2 e^{2 u_j}.
BlockMinResult symmetric_coordinate_min(const ExplicitMatrix& A,
                                        const EquilibrationParams& params,
                                        int max_sweeps = 50000,
                                        double tol = 1e-12);

struct TensorMinResult {
  Vec u, v, w;
  int sweeps = 0;
  bool converged = false;
  double projected_grad_norm = 0.0;
};

/// Tensor-variant oracle: alternating exact axis minimization, same closed
/// form as the matrix case with sigma contracted over the other two axes.
TensorMinResult tensor_equilibrate_exact(const Tensor3& T,
                                         const TensorEquilibrationParams& params,
                                         int max_sweeps = 50000,
                                         double tol = 1e-12);

struct NewtonResult {
  Vec u, v;
  double p_star = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  bool box_active = false;  // unconstrained optimum left the box
  std::vector<double> objective_trace;
};

/// Second-order reference solver for the regularized objective: damped
/// Newton with an exact Hessian solve via the Schur complement of the
/// larger diagonal block,
///   H = [diag(2 r + gamma), 2 P; 2 P^T, diag(2 c + gamma)],
///   P_ij = A_ij^2 e^{2 u_i + 2 v_j},  r = P 1,  c = P^T 1,
/// so one solve costs one dense factorization of the smaller side plus
/// O(sum_i nnz_i^2) to form it. Runs unconstrained; if the minimizer lands
/// outside the box (rare for sane M), falls back to projected-gradient
/// polishing and reports box_active. Guarded to m + n <= 4000.
NewtonResult newton_oracle(const ExplicitMatrix& A,
                           const EquilibrationParams& params,
                           double grad_tol = 1e-11, int max_iters = 200);

}  // namespace equil
