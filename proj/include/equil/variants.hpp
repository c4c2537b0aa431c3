#pragma once

#include <vector>

#include "equil/equilibrate.hpp"

namespace equil {

/// Symmetric equilibration: one log-scaling u with D = diag(e^u) applied on
/// both sides of a symmetric A. Objective
///   1/4 sum_ij A_ij^2 e^{2 u_i + 2 u_j} - alpha^2 1^T u + gamma/2 |u|^2,
/// stochastic update from |D A D s|^2 with a single probe, one apply and no
/// adjoint per iteration. Symmetry of `op` is spot-checked with random
/// probes up front; result has u == v and d == e.
ScalingResult sgd_equilibrate_symmetric(const LinearOperator& op,
                                        const EquilibrationParams& params,
                                        const DiagnosticsConfig& diag = {});

/// Nonuniform targets: row i of the scaled matrix aims at squared norm r_i,
/// column j at c_j. Requires r, c > 0 and sum(r) == sum(c) to relative
/// 1e-8, the analogue of m alpha^2 == n beta^2; with r = alpha^2 1 and
/// c = beta^2 1 this reproduces sgd_equilibrate exactly, same seed giving the
/// same iterates, because both run the identical engine path.
ScalingResult sgd_equilibrate_targets(const LinearOperator& op, const Vec& r,
                                      const Vec& c,
                                      const EquilibrationParams& params,
                                      const DiagnosticsConfig& diag = {});

/// Contiguous partition of rows and columns into blocks that share one
/// scaling each.
struct BlockStructure {
  std::vector<Index> row_block;  // row_block[i] = block index of row i
  std::vector<Index> col_block;  // col_block[j] = block index of column j
  Index row_blocks = 0;          // number of row blocks
  Index col_blocks = 0;

  static BlockStructure trivial(Index rows, Index cols);  // one row = one block
  void validate(Index rows, Index cols) const;
};

/// Block equilibration: rows in block k share u_k. The targets become
/// aggregate ones (block k of rows aims at total squared norm
/// |block k| * alpha^2), and the estimate for a block sums |D A E s|^2 over
/// its members. With singleton blocks this is bit for bit sgd_equilibrate.
/// The returned u, v, d, e are expanded to full row/column length.
ScalingResult sgd_equilibrate_block(const LinearOperator& op,
                                    const BlockStructure& structure,
                                    const EquilibrationParams& params,
                                    const DiagnosticsConfig& diag = {});

/// Dense order-3 tensor, values addressed as (i, j, k) with k fastest.
struct Tensor3 {
  Index m = 0, n = 0, p = 0;
  std::vector<double> values;

  static Tensor3 zeros(Index m, Index n, Index p);
  double& at(Index i, Index j, Index k);
  double at(Index i, Index j, Index k) const;
  Index size() const { return m * n * p; }
};

/// Contracts T against a matrix over the two axes other than free_axis
/// (taken in ascending axis order):
///   free_axis 0: y_i = sum_jk T_ijk X_jk   (X is n x p)
///   free_axis 1: y_j = sum_ik T_ijk X_ik   (X is m x p)
///   free_axis 2: y_k = sum_ij T_ijk X_ij   (X is m x n)
Vec tensor_contract(const Tensor3& T, int free_axis, const Mat& X);

/// Rank-one case X = a b^T without materializing the outer product; the
/// stochastic updates only ever contract against sign-vector outer products.
Vec tensor_contract(const Tensor3& T, int free_axis, const Vec& a,
                    const Vec& b);

/// Norm targets and solver knobs for the order-3 problem. The third target
/// is named tau rather than reusing the letter that names the regularization
/// weight. Auto targets generalize the matrix rule: with
/// s = (m n p)^{1/3}, alpha = sqrt(s/m), beta = sqrt(s/n), tau = sqrt(s/p),
/// which satisfies the consistency condition
/// m alpha^2 == n beta^2 == p tau^2 by construction.
struct TensorEquilibrationParams {
  double alpha = 0.0;  // 0 = auto
  double beta = 0.0;
  double tau = 0.0;
  double gamma = 0.1;
  double max_log_scale = 9.210340371976184;
  int iterations = 1000;
  std::uint64_t seed = 0;
};

struct TensorScalingResult {
  Vec u, v, w;
  Vec d, e, f;
  double alpha = 0.0, beta = 0.0, tau = 0.0;
  bool box_feasible = true;
  bool iterate_bound_ok = true;
};

struct ResolvedTensorTargets {
  double alpha, beta, tau;
};

/// Fills automatic tensor targets and checks the consistency condition.
ResolvedTensorTargets resolve_tensor_targets(
    const TensorEquilibrationParams& params, Index m, Index n, Index p);

/// Fiber norms of the scaled tensor diag-scaled by (d, e, f) along each axis:
/// axis 0 entry i is sum_jk (d_i T_ijk e_j f_k)^2, and so on. Diagnostic.
void tensor_scaled_norms_sq(const Tensor3& T, const Vec& d, const Vec& e,
                            const Vec& f, Vec& axis0, Vec& axis1, Vec& axis2);

/// Order-3 equilibration: three scaling families updated in lockstep. The
/// squared fiber norm along axis 0 is estimated by contracting the scaled
/// tensor against a fresh Rademacher probe per remaining axis,
///   est_i = (d_i sum_jk T_ijk (e_j s_j)(f_k t_k))^2,
/// which is unbiased because the cross terms of the expanded square have
/// independent mean-zero sign products. Each axis consumes its own fresh
/// probe pair, drawn in ascending axis order.
TensorScalingResult sgd_equilibrate_tensor(const Tensor3& T,
                                           const TensorEquilibrationParams& params);

}  // namespace equil
