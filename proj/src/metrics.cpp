#include "equil/metrics.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace equil {

namespace {

constexpr Index kMaxSvdDim = 4000;
constexpr double kSingularTol = 1e-12;  // sigma_min <= tol * sigma_max

Vec singular_values(const ExplicitMatrix& A) {
  detail::require(A.rows() == A.cols(), "metrics: matrix must be square");
  detail::require(A.rows() <= kMaxSvdDim,
                  "metrics: dense SVD guarded to n <= 4000");
  Eigen::BDCSVD<Mat> svd(A.to_dense());
  return svd.singularValues();
}

// Row and column norms squared of diag(e^u) A diag(e^v) in one pass.
void scaled_norms_sq(const ExplicitMatrix& A, const Vec& u, const Vec& v,
                     Vec& row_sq, Vec& col_sq) {
  detail::require(u.size() == A.rows() && v.size() == A.cols(),
                  "metrics: scaling length mismatch");
  const Vec eu = (2.0 * u).array().exp();
  const Vec ev = (2.0 * v).array().exp();
  row_sq = Vec::Zero(A.rows());
  col_sq = Vec::Zero(A.cols());
  A.for_each_entry([&](Index i, Index j, double a) {
    const double t = a * a * eu[i] * ev[j];
    row_sq[i] += t;
    col_sq[j] += t;
  });
}

}  // namespace

double rms_error(const ExplicitMatrix& A, const Vec& u, const Vec& v,
                 double alpha, double beta) {
  detail::require(alpha > 0.0 && beta > 0.0, "rms_error: targets must be positive");
  Vec row_sq, col_sq;
  scaled_norms_sq(A, u, v, row_sq, col_sq);
  double acc = 0.0;
  for (Index i = 0; i < A.rows(); ++i) {
    const double d = std::sqrt(row_sq[i]) - alpha;
    acc += d * d;
  }
  for (Index j = 0; j < A.cols(); ++j) {
    const double d = std::sqrt(col_sq[j]) - beta;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(A.rows() + A.cols()));
}

double condition_number(const ExplicitMatrix& A) {
  const Vec sigma = singular_values(A);
  const double smax = sigma[0];
  const double smin = sigma[sigma.size() - 1];
  if (smax == 0.0 || smin <= kSingularTol * smax) {
    return std::numeric_limits<double>::infinity();
  }
  return smax / smin;
}

double log_phi(const ExplicitMatrix& A) {
  const Vec sigma = singular_values(A);
  detail::check(sigma[0] > 0.0 &&
                    sigma[sigma.size() - 1] > kSingularTol * sigma[0],
                "log_phi: singular input");
  double acc = 0.0;
  for (Index i = 0; i < sigma.size(); ++i) {
    acc += 0.5 * sigma[i] * sigma[i] - std::log(sigma[i]);
  }
  return acc;
}

double phi(const ExplicitMatrix& A) { return std::exp(log_phi(A)); }

std::pair<double, double> kappa_bounds(const ExplicitMatrix& A) {
  detail::require(A.rows() == A.cols(), "kappa_bounds: matrix must be square");
  const Vec row_sq = A.row_norms_sq();
  const Vec col_sq = A.col_norms_sq();
  const double row_min = row_sq.minCoeff();
  const double col_min = col_sq.minCoeff();
  detail::check(row_min > 0.0 && col_min > 0.0,
                "kappa_bounds: zero row or column");
  const double lower = std::sqrt(
      std::max(row_sq.maxCoeff() / row_min, col_sq.maxCoeff() / col_min));
  const double n = static_cast<double>(A.rows());
  const double upper = 2.0 * std::exp(log_phi(A) - 0.5 * n);
  return {lower, upper};
}

double convergence_constant_bound(const ExplicitMatrix& A,
                                  const EquilibrationParams& params) {
  validate_params(params);
  const auto [alpha, beta] = resolve_targets(params, A.rows(), A.cols());
  const double m = static_cast<double>(A.rows());
  const double n = static_cast<double>(A.cols());
  const double M = params.max_log_scale;
  const double gamma = params.gamma;

  const Vec row_sq = A.row_norms_sq();
  const Vec col_sq = A.col_norms_sq();
  double quartic = 0.0;
  A.for_each_entry([&](Index, Index, double a) {
    const double a2 = a * a;
    quartic += a2 * a2;
  });

  // Gradient of the regularized objective at the box corner (M 1, M 1).
  const double e4M = std::exp(4.0 * M);
  double grad_sq = 0.0;
  for (Index i = 0; i < A.rows(); ++i) {
    const double g = e4M * row_sq[i] - alpha * alpha + gamma * M;
    grad_sq += g * g;
  }
  for (Index j = 0; j < A.cols(); ++j) {
    const double g = e4M * col_sq[j] - beta * beta + gamma * M;
    grad_sq += g * g;
  }

  const double linear = 4.0 * gamma * M * (alpha * alpha * m + beta * beta * n);
  const double variance =
      std::exp(8.0 * M) *
      (3.0 * (row_sq.squaredNorm() + col_sq.squaredNorm()) - 4.0 * quartic);
  return grad_sq + linear + variance;
}

}  // namespace equil
