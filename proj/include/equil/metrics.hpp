#pragma once

#include <utility>

#include "equil/explicit_matrix.hpp"
#include "equil/params.hpp"

namespace equil {

/// Root-mean-square deviation of the scaled matrix's row and column norms
/// from their targets:
///   sqrt( (sum_i (r_i - alpha)^2 + sum_j (c_j - beta)^2) / (m + n) )
/// where r, c are the row / column 2-norms of diag(e^u) A diag(e^v).
double rms_error(const ExplicitMatrix& A, const Vec& u, const Vec& v,
                 double alpha, double beta);

/// Largest over smallest singular value via dense SVD. Square inputs with
/// n <= 4000 only; numerically singular matrices report +infinity.
double condition_number(const ExplicitMatrix& A);

/// log of Phi(A) = exp(|A|_F^2 / 2) / det(A^T A)^{1/2}, computed in the log
/// domain as sum_i (sigma_i^2 / 2 - log sigma_i). Each singular value
/// contributes a term minimized at sigma = 1, which is what makes Phi a
/// conditioning merit function. Errors on singular input.
double log_phi(const ExplicitMatrix& A);

/// exp(log_phi(A)); overflows to +infinity for badly scaled input, use
/// log_phi for anything serious.
double phi(const ExplicitMatrix& A);

/// {lower, upper} bracket for the condition number without an SVD:
///   lower = max(row norm ratio, column norm ratio)
///   upper = 2 e^{-n/2} Phi(A)
/// Square nonsingular input.
std::pair<double, double> kappa_bounds(const ExplicitMatrix& A);

/// Upper bound on the expected squared norm of the stochastic gradient over
/// the box, the constant that drives the O(1/t) convergence rate:
///   |grad f(M 1, M 1)|^2 + 4 gamma M (alpha^2 m + beta^2 n)
///     + e^{8M} (3 (sum_i rowsq_i^2 + sum_j colsq_j^2) - 4 sum_ij A_ij^4).
/// Diagnostic only; grows like e^{8M}, so expect astronomically loose values.
double convergence_constant_bound(const ExplicitMatrix& A,
                                  const EquilibrationParams& params);

}  // namespace equil
