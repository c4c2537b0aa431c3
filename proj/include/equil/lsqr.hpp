#pragma once

#include <vector>

#include "equil/linop.hpp"
#include "equil/params.hpp"

namespace equil {

struct LsqrRun {
  Vec x;  // solution estimate in original coordinates
  /// residual_history[k] = |b - A x| / |b| after k total iterations, where
  /// total iterations include the equilibration budget for preconditioned
  /// runs (a flat prefix at 1.0: the solution is still zero while the
  /// scaling is being learned). Entry 0 is the starting residual 1.0.
  std::vector<double> residual_history;
  int iterations = 0;        // LSQR iterations actually performed
  int equil_iterations = 0;  // charged equilibration iterations
  bool reached_tol = false;
  bool breakdown = false;  // bidiagonalization hit an exact invariant subspace
  long long apply_count = 0;    // charged applies (algorithmic only)
  long long adjoint_count = 0;  // charged adjoints; setup costs one extra
};

/// Golub-Kahan bidiagonalization least squares (the classic recurrence with
/// plane rotations). Per iteration: one apply and one adjoint apply, plus
/// one adjoint at setup. The relative residual of the original system is
/// recorded each iteration from an uncharged probe; iteration stops when it
/// reaches rel_residual_tol. Requires b != 0.
LsqrRun lsqr(const LinearOperator& op, const Vec& b, int max_iters,
             double rel_residual_tol);

/// Equilibrate first, then run LSQR on diag(d) A diag(e) with right-hand
/// side diag(d) b, reporting everything in original coordinates
/// (x = e .* x_scaled, residuals of the original system). The equilibration
/// probes are charged: they cost params.iterations applies and adjoints and
/// occupy the first params.iterations entries of the residual history.
LsqrRun lsqr_preconditioned(const LinearOperator& op, const Vec& b,
                            const EquilibrationParams& equil_params,
                            int max_iters, double rel_residual_tol);

/// Largest singular value estimate by power iteration on A^T A from a seeded
/// random start; stops when the Rayleigh quotient settles to rel_tol or at
/// the iteration cap. Deterministic for a given seed. Uncharged setup work
/// for the primal-dual solver's step sizes.
double spectral_norm(const LinearOperator& op, int max_iters = 100,
                     double rel_tol = 1e-6, std::uint64_t seed = 0);

}  // namespace equil
