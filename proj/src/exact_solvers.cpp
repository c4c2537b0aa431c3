#include "equil/exact_solvers.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

#include "equil/metrics.hpp"

namespace equil {

double lambert_w_exp(double y) {
  if (std::isinf(y) && y < 0.0) return 0.0;  // W(0) = 0
  detail::require(!std::isnan(y), "lambert_w_exp: NaN input");
  detail::require(!(std::isinf(y) && y > 0.0), "lambert_w_exp: infinite input");

  // Initial guess for the root of g(w) = w + log w - y. g is increasing and
  // concave, so after one step Newton approaches the root monotonically from
  // the left; the guesses below keep the first step well-behaved.
  double w;
  if (y >= 1.0) {
    const double ly = std::log(y);
    w = y - ly + ly / y;  // asymptotic expansion of W(e^y)
    if (w <= 0.0) w = 1.0;
  } else {
    const double x = std::exp(y);
    if (x == 0.0) return 0.0;
    w = x * std::exp(-x / (1.0 + x));  // w = x e^{-w} seeded with w ~ x/(1+x)
  }

  for (int it = 0; it < 100; ++it) {
    const double g = w + std::log(w) - y;
    const double dw = g * w / (w + 1.0);
    double w_next = w - dw;
    if (w_next <= 0.0) w_next = 0.5 * w;
    if (std::abs(w_next - w) <= 2e-16 * w_next) return w_next;
    w = w_next;
  }
  return w;
}

double lambert_w(double x) {
  detail::require(x >= 0.0, "lambert_w: principal branch needs x >= 0");
  if (x == 0.0) return 0.0;
  return lambert_w_exp(std::log(x));
}

SinkhornResult sinkhorn_knopp(const ExplicitMatrix& A, double alpha,
                              double beta, int max_iters, double tol) {
  detail::require(alpha > 0.0 && beta > 0.0,
                  "sinkhorn_knopp: targets must be positive");
  detail::require(max_iters >= 0 && tol >= 0.0,
                  "sinkhorn_knopp: bad iteration budget or tolerance");
  const Index m = A.rows();
  const Index n = A.cols();

  SinkhornResult res;
  res.d = Vec::Ones(m);
  res.e = Vec::Ones(n);

  Vec sigma_row(m), sigma_col(n);
  for (int it = 1; it <= max_iters; ++it) {
    sigma_row.setZero();
    A.for_each_entry([&](Index i, Index j, double a) {
      sigma_row[i] += a * a * res.e[j] * res.e[j];
    });
    for (Index i = 0; i < m; ++i) {
      detail::check(sigma_row[i] > 0.0, "sinkhorn_knopp: zero row " +
                                            std::to_string(i));
      res.d[i] = alpha / std::sqrt(sigma_row[i]);
    }

    sigma_col.setZero();
    A.for_each_entry([&](Index i, Index j, double a) {
      sigma_col[j] += a * a * res.d[i] * res.d[i];
    });
    for (Index j = 0; j < n; ++j) {
      detail::check(sigma_col[j] > 0.0, "sinkhorn_knopp: zero column " +
                                            std::to_string(j));
      res.e[j] = beta / std::sqrt(sigma_col[j]);
    }

    res.iterations = it;
    res.final_rms = rms_error(A, res.d.array().log(), res.e.array().log(),
                              alpha, beta);
    if (res.final_rms <= tol) {
      res.converged = true;
      break;
    }
  }
  if (max_iters == 0) {
    res.final_rms = rms_error(A, Vec::Zero(m), Vec::Zero(n), alpha, beta);
  }
  return res;
}

void balance_scalings(Vec& d, Vec& e) {
  detail::require((d.array() > 0.0).all() && (e.array() > 0.0).all(),
                  "balance_scalings: scalings must be positive");
  const double mean_log_d = d.array().log().mean();
  const double mean_log_e = e.array().log().mean();
  const double shift = 0.5 * (mean_log_e - mean_log_d);
  d *= std::exp(shift);
  e *= std::exp(-shift);
}

namespace {

// Closed-form minimizer of (1/2) sigma e^{2t} - lin t + (gamma/2) t^2 over
// [-M, M]; see the header of regularized_block_min.
double coordinate_min(double sigma, double lin, double gamma, double M) {
  if (sigma == 0.0) {
    return std::min(std::max(lin / gamma, -M), M);
  }
  const double cap = lin / gamma;
  const double w = lambert_w_exp(std::log(2.0 * sigma / gamma) + 2.0 * cap);
  const double t = cap - 0.5 * w;
  return std::min(std::max(t, -M), M);
}

double projected_grad_norm(const Vec& u, const Vec& v, const Vec& gu,
                           const Vec& gv, double M) {
  double acc = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    const double step = u[i] - std::min(std::max(u[i] - gu[i], -M), M);
    acc += step * step;
  }
  for (Index j = 0; j < v.size(); ++j) {
    const double step = v[j] - std::min(std::max(v[j] - gv[j], -M), M);
    acc += step * step;
  }
  return std::sqrt(acc);
}

}  // namespace

BlockMinResult regularized_block_min_weighted(const ExplicitMatrix& A,
                                              const Vec& lin_u,
                                              const Vec& lin_v, double gamma,
                                              double max_log_scale,
                                              int max_sweeps, double tol) {
  detail::require(gamma > 0.0, "regularized_block_min: gamma must be positive");
  detail::require(max_log_scale > 0.0,
                  "regularized_block_min: max_log_scale must be positive");
  detail::require(lin_u.size() == A.rows() && lin_v.size() == A.cols(),
                  "regularized_block_min: linear term length mismatch");
  const Index m = A.rows();
  const Index n = A.cols();
  const double M = max_log_scale;

  BlockMinResult res;
  res.u = Vec::Zero(m);
  res.v = Vec::Zero(n);

  Vec sigma(std::max(m, n)), gu, gv;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    // u given v
    sigma.head(m).setZero();
    {
      const Vec ev = (2.0 * res.v).array().exp();
      A.for_each_entry([&](Index i, Index j, double a) {
        if (a != 0.0) sigma[i] += a * a * ev[j];
      });
    }
    for (Index i = 0; i < m; ++i) {
      res.u[i] = coordinate_min(sigma[i], lin_u[i], gamma, M);
    }

    // v given u
    sigma.head(n).setZero();
    {
      const Vec eu = (2.0 * res.u).array().exp();
      A.for_each_entry([&](Index i, Index j, double a) {
        if (a != 0.0) sigma[j] += a * a * eu[i];
      });
    }
    for (Index j = 0; j < n; ++j) {
      res.v[j] = coordinate_min(sigma[j], lin_v[j], gamma, M);
    }

    res.sweeps = sweep;
    res.objective_trace.push_back(
        objective_weighted(A, res.u, res.v, lin_u, lin_v, gamma));
    gradient_weighted(A, res.u, res.v, lin_u, lin_v, gamma, gu, gv);
    res.projected_grad_norm = projected_grad_norm(res.u, res.v, gu, gv, M);
    if (res.projected_grad_norm <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

BlockMinResult regularized_block_min(const ExplicitMatrix& A,
                                     const EquilibrationParams& params,
                                     int max_sweeps, double tol) {
  validate_params(params);
  const auto [alpha, beta] = resolve_targets(params, A.rows(), A.cols());
  return regularized_block_min_weighted(
      A, Vec::Constant(A.rows(), alpha * alpha),
      Vec::Constant(A.cols(), beta * beta), params.gamma,
      params.max_log_scale, max_sweeps, tol);
}

BlockMinResult regularized_block_min_blocks(const ExplicitMatrix& A,
                                            const BlockStructure& structure,
                                            const EquilibrationParams& params,
                                            int max_sweeps, double tol) {
  validate_params(params);
  structure.validate(A.rows(), A.cols());
  const auto [alpha, beta] = resolve_targets(params, A.rows(), A.cols());
  const Index m = A.rows();
  const Index n = A.cols();
  const Index p = structure.row_blocks;
  const Index q = structure.col_blocks;
  const double gamma = params.gamma;
  const double M = params.max_log_scale;

  Vec lin_u = Vec::Zero(p), lin_v = Vec::Zero(q);
  for (Index i = 0; i < m; ++i)
    lin_u[structure.row_block[static_cast<std::size_t>(i)]] += alpha * alpha;
  for (Index j = 0; j < n; ++j)
    lin_v[structure.col_block[static_cast<std::size_t>(j)]] += beta * beta;

  BlockMinResult res;
  res.u = Vec::Zero(p);
  res.v = Vec::Zero(q);

  const auto expand = [](const Vec& compact, const std::vector<Index>& map) {
    Vec full(static_cast<Index>(map.size()));
    for (std::size_t i = 0; i < map.size(); ++i)
      full[static_cast<Index>(i)] = compact[map[i]];
    return full;
  };

  Vec sigma, gu, gv;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    sigma = Vec::Zero(p);
    {
      const Vec ev = (2.0 * expand(res.v, structure.col_block)).array().exp();
      A.for_each_entry([&](Index i, Index j, double a) {
        if (a != 0.0)
          sigma[structure.row_block[static_cast<std::size_t>(i)]] +=
              a * a * ev[j];
      });
    }
    for (Index k = 0; k < p; ++k)
      res.u[k] = coordinate_min(sigma[k], lin_u[k], gamma, M);

    sigma = Vec::Zero(q);
    {
      const Vec eu = (2.0 * expand(res.u, structure.row_block)).array().exp();
      A.for_each_entry([&](Index i, Index j, double a) {
        if (a != 0.0)
          sigma[structure.col_block[static_cast<std::size_t>(j)]] +=
              a * a * eu[i];
      });
    }
    for (Index k = 0; k < q; ++k)
      res.v[k] = coordinate_min(sigma[k], lin_v[k], gamma, M);

    res.sweeps = sweep;
    // Objective and gradient in block coordinates: the quadratic term uses
    // the expanded scalings, the linear and regularization terms the block
    // variables, matching the stochastic block solver.
    const Vec u_full = expand(res.u, structure.row_block);
    const Vec v_full = expand(res.v, structure.col_block);
    double quad = 0.0;
    A.for_each_entry([&](Index i, Index j, double a) {
      if (a != 0.0) quad += a * a * std::exp(2.0 * (u_full[i] + v_full[j]));
    });
    res.objective_trace.push_back(
        0.5 * quad - lin_u.dot(res.u) - lin_v.dot(res.v) +
        0.5 * gamma * (res.u.squaredNorm() + res.v.squaredNorm()));

    Vec gu_full, gv_full;
    gradient_weighted(A, u_full, v_full, Vec::Zero(m), Vec::Zero(n), 0.0,
                      gu_full, gv_full);
    gu = Vec::Zero(p);
    gv = Vec::Zero(q);
    for (Index i = 0; i < m; ++i)
      gu[structure.row_block[static_cast<std::size_t>(i)]] += gu_full[i];
    for (Index j = 0; j < n; ++j)
      gv[structure.col_block[static_cast<std::size_t>(j)]] += gv_full[j];
    gu += gamma * res.u - lin_u;
    gv += gamma * res.v - lin_v;
    res.projected_grad_norm = projected_grad_norm(res.u, res.v, gu, gv, M);
    if (res.projected_grad_norm <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

BlockMinResult symmetric_coordinate_min(const ExplicitMatrix& A,
                                        const EquilibrationParams& params,
                                        int max_sweeps, double tol) {
  validate_params(params);
  detail::require(A.rows() == A.cols(),
                  "symmetric_coordinate_min: matrix must be square");
  const Index n = A.rows();
  const auto [alpha, beta] = resolve_targets(params, n, n);
  (void)beta;
  const double a2 = alpha * alpha;
  const double gamma = params.gamma;
  const double M = params.max_log_scale;

  BlockMinResult res;
  res.u = Vec::Zero(n);

  // phi'(t) = q e^{4t} + s e^{2t} - alpha^2 + gamma t, strictly increasing.
  const auto dphi = [&](double q, double s, double t) {
    return q * std::exp(4.0 * t) + s * std::exp(2.0 * t) - a2 + gamma * t;
  };
  const auto solve_coordinate = [&](double q, double s, double t0) {
    if (dphi(q, s, -M) >= 0.0) return -M;
    if (dphi(q, s, M) <= 0.0) return M;
    double lo = -M, hi = M;
    double t = std::min(std::max(t0, lo), hi);
    for (int it = 0; it < 200; ++it) {
      const double g = dphi(q, s, t);
      if (g > 0.0) {
        hi = t;
      } else if (g < 0.0) {
        lo = t;
      } else {
        return t;
      }
      const double scale =
          a2 + gamma * std::abs(t) + q * std::exp(4.0 * t) +
          s * std::exp(2.0 * t);
      // Converged at t: return it, never a bisection fallback point.
      if (std::abs(g) <= 1e-15 * scale) return t;
      const double curvature =
          4.0 * q * std::exp(4.0 * t) + 2.0 * s * std::exp(2.0 * t) + gamma;
      double t_next = t - g / curvature;
      if (!(t_next > lo && t_next < hi)) t_next = 0.5 * (lo + hi);
      if (hi - lo <= 4e-16 * std::max(1.0, std::abs(t))) return t_next;
      t = t_next;
    }
    return t;
  };

  Vec eu(n);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (Index k = 0; k < n; ++k) {
      double q = 0.0, s = 0.0;
      A.for_each_in_row(k, [&](Index j, double a) {
        if (a == 0.0) return;
        if (j == k) {
          q = a * a;
        } else {
          s += a * a * std::exp(2.0 * res.u[j]);
        }
      });
      res.u[k] = solve_coordinate(q, s, res.u[k]);
    }

    res.sweeps = sweep;
    // Objective of the symmetric problem, each unordered pair counted once.
    double quad = 0.0;
    A.for_each_entry([&](Index i, Index j, double a) {
      if (a != 0.0) quad += a * a * std::exp(2.0 * (res.u[i] + res.u[j]));
    });
    res.objective_trace.push_back(0.25 * quad - a2 * res.u.sum() +
                                  0.5 * gamma * res.u.squaredNorm());

    // Gradient g_k = e^{2u_k} sum_j A_kj^2 e^{2u_j} - alpha^2 + gamma u_k.
    eu = (2.0 * res.u).array().exp();
    Vec g = Vec::Zero(n);
    A.for_each_entry([&](Index i, Index j, double a) {
      if (a != 0.0) g[i] += a * a * eu[i] * eu[j];
    });
    g += gamma * res.u - Vec::Constant(n, a2);
    double acc = 0.0;
    for (Index k = 0; k < n; ++k) {
      const double step = res.u[k] - std::min(std::max(res.u[k] - g[k], -M), M);
      acc += step * step;
    }
    res.projected_grad_norm = std::sqrt(acc);
    if (res.projected_grad_norm <= tol) {
      res.converged = true;
      break;
    }
  }
  res.v = res.u;
  return res;
}

TensorMinResult tensor_equilibrate_exact(const Tensor3& T,
                                         const TensorEquilibrationParams& params,
                                         int max_sweeps, double tol) {
  detail::require(params.gamma > 0.0,
                  "tensor_equilibrate_exact: gamma must be positive");
  const double gamma = params.gamma;
  const double M = params.max_log_scale;

  const ResolvedTensorTargets targets =
      resolve_tensor_targets(params, T.m, T.n, T.p);
  const double a2 = targets.alpha * targets.alpha;
  const double b2 = targets.beta * targets.beta;
  const double t2 = targets.tau * targets.tau;

  TensorMinResult res;
  res.u = Vec::Zero(T.m);
  res.v = Vec::Zero(T.n);
  res.w = Vec::Zero(T.p);

  Vec ax0, ax1, ax2;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    tensor_scaled_norms_sq(T, Vec::Ones(T.m), res.v.array().exp(),
                           res.w.array().exp(), ax0, ax1, ax2);
    for (Index i = 0; i < T.m; ++i)
      res.u[i] = coordinate_min(ax0[i], a2, gamma, M);

    tensor_scaled_norms_sq(T, res.u.array().exp(), Vec::Ones(T.n),
                           res.w.array().exp(), ax0, ax1, ax2);
    for (Index j = 0; j < T.n; ++j)
      res.v[j] = coordinate_min(ax1[j], b2, gamma, M);

    tensor_scaled_norms_sq(T, res.u.array().exp(), res.v.array().exp(),
                           Vec::Ones(T.p), ax0, ax1, ax2);
    for (Index k = 0; k < T.p; ++k)
      res.w[k] = coordinate_min(ax2[k], t2, gamma, M);

    res.sweeps = sweep;
    tensor_scaled_norms_sq(T, res.u.array().exp(), res.v.array().exp(),
                           res.w.array().exp(), ax0, ax1, ax2);
    double acc = 0.0;
    const auto fold = [&](const Vec& x, const Vec& norms, double lin) {
      for (Index i = 0; i < x.size(); ++i) {
        const double g = norms[i] - lin + gamma * x[i];
        const double step = x[i] - std::min(std::max(x[i] - g, -M), M);
        acc += step * step;
      }
    };
    fold(res.u, ax0, a2);
    fold(res.v, ax1, b2);
    fold(res.w, ax2, t2);
    res.projected_grad_norm = std::sqrt(acc);
    if (res.projected_grad_norm <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

namespace {

// Newton assumes m >= n so the dense Schur complement is n x n.
NewtonResult newton_impl(const ExplicitMatrix& A, const Vec& lin_u,
                         const Vec& lin_v, double gamma, double M,
                         double grad_tol, int max_iters) {
  const Index m = A.rows();
  const Index n = A.cols();

  // Squared entries grouped by row; structural and numerical zeros dropped.
  std::vector<std::vector<std::pair<Index, double>>> rows(
      static_cast<std::size_t>(m));
  A.for_each_entry([&](Index i, Index j, double a) {
    if (a != 0.0) rows[static_cast<std::size_t>(i)].push_back({j, a * a});
  });

  NewtonResult res;
  Vec u = Vec::Zero(m), v = Vec::Zero(n);
  double f = objective_weighted(A, u, v, lin_u, lin_v, gamma);
  res.objective_trace.push_back(f);

  Vec gu, gv;
  Vec prow;  // P entries of one row, packed
  for (int it = 1; it <= max_iters; ++it) {
    gradient_weighted(A, u, v, lin_u, lin_v, gamma, gu, gv);
    res.grad_norm = std::sqrt(gu.squaredNorm() + gv.squaredNorm());
    if (res.grad_norm <= grad_tol) {
      res.converged = true;
      break;
    }

    const Vec eu = (2.0 * u).array().exp();
    const Vec ev = (2.0 * v).array().exp();
    Vec ru = Vec::Zero(m), cv = Vec::Zero(n);
    for (Index i = 0; i < m; ++i) {
      for (const auto& [j, a2] : rows[static_cast<std::size_t>(i)]) {
        const double pij = a2 * eu[i] * ev[j];
        ru[i] += pij;
        cv[j] += pij;
      }
    }
    const Vec du_diag = (2.0 * ru).array() + gamma;
    const Vec dv_diag = (2.0 * cv).array() + gamma;

    // S = diag(dv) - 4 P^T diag(du)^{-1} P, built row by row of P.
    Mat S = dv_diag.asDiagonal();
    for (Index i = 0; i < m; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      const Index k = static_cast<Index>(row.size());
      if (k == 0) continue;
      prow.resize(k);
      for (Index a = 0; a < k; ++a)
        prow[a] = row[static_cast<std::size_t>(a)].second * eu[i] *
                  ev[row[static_cast<std::size_t>(a)].first];
      const double inv = 4.0 / du_diag[i];
      for (Index a = 0; a < k; ++a) {
        const Index ja = row[static_cast<std::size_t>(a)].first;
        for (Index b = 0; b < k; ++b) {
          S(ja, row[static_cast<std::size_t>(b)].first) -=
              inv * prow[a] * prow[b];
        }
      }
    }

    // Solve H [du; dv] = -[gu; gv] by eliminating the u block.
    const Vec t = -gu.cwiseQuotient(du_diag);
    Vec rhs_v = -gv;
    for (Index i = 0; i < m; ++i) {
      for (const auto& [j, a2] : rows[static_cast<std::size_t>(i)]) {
        rhs_v[j] -= 2.0 * a2 * eu[i] * ev[j] * t[i];
      }
    }
    Eigen::LDLT<Mat> ldlt(S);
    detail::check(ldlt.info() == Eigen::Success,
                  "newton_oracle: Schur factorization failed");
    Vec dv = ldlt.solve(rhs_v);
    Vec du = -gu;
    for (Index i = 0; i < m; ++i) {
      double acc = 0.0;
      for (const auto& [j, a2] : rows[static_cast<std::size_t>(i)]) {
        acc += a2 * eu[i] * ev[j] * dv[j];
      }
      du[i] = (du[i] - 2.0 * acc) / du_diag[i];
    }

    double dd = gu.dot(du) + gv.dot(dv);
    if (!(dd < 0.0)) {  // numerical safety net, never expected
      du = -gu;
      dv = -gv;
      dd = -(gu.squaredNorm() + gv.squaredNorm());
    }

    double step = 1.0;
    double f_new = 0.0;
    for (;;) {
      f_new = objective_weighted(A, u + step * du, v + step * dv, lin_u,
                                 lin_v, gamma);
      if (f_new <= f + 1e-4 * step * dd) break;
      step *= 0.5;
      detail::check(step > 1e-20, "newton_oracle: line search stalled");
    }
    u += step * du;
    v += step * dv;
    f = f_new;
    res.objective_trace.push_back(f);
    res.iterations = it;
  }

  if (u.lpNorm<Eigen::Infinity>() > M || v.lpNorm<Eigen::Infinity>() > M) {
    // The box is active: polish with projected gradient from the clamped
    // point. Slow but only reachable with deliberately tight boxes.
    res.box_active = true;
    res.converged = false;
    u = project_box(u, M);
    v = project_box(v, M);
    f = objective_weighted(A, u, v, lin_u, lin_v, gamma);
    double step = 1.0;
    for (long it = 0; it < 500000; ++it) {
      gradient_weighted(A, u, v, lin_u, lin_v, gamma, gu, gv);
      const Vec u_next = project_box(u - step * gu, M);
      const Vec v_next = project_box(v - step * gv, M);
      const Vec pu = u_next - u;
      const Vec pv = v_next - v;
      const double move_sq = pu.squaredNorm() + pv.squaredNorm();
      res.grad_norm = std::sqrt(move_sq) / step;
      if (res.grad_norm <= grad_tol) {
        res.converged = true;
        break;
      }
      const double f_next =
          objective_weighted(A, u_next, v_next, lin_u, lin_v, gamma);
      if (f_next <= f + gu.dot(pu) + gv.dot(pv) + move_sq / (2.0 * step)) {
        u = u_next;
        v = v_next;
        f = f_next;
        step *= 1.2;
      } else {
        step *= 0.5;
        detail::check(step > 1e-20, "newton_oracle: projected step stalled");
      }
    }
  }

  res.u = std::move(u);
  res.v = std::move(v);
  res.p_star = f;
  return res;
}

}  // namespace

NewtonResult newton_oracle(const ExplicitMatrix& A,
                           const EquilibrationParams& params, double grad_tol,
                           int max_iters) {
  validate_params(params);
  detail::require(A.rows() + A.cols() <= 4000,
                  "newton_oracle: guarded to m + n <= 4000");
  const auto [alpha, beta] = resolve_targets(params, A.rows(), A.cols());
  if (A.cols() <= A.rows()) {
    return newton_impl(A, Vec::Constant(A.rows(), alpha * alpha),
                       Vec::Constant(A.cols(), beta * beta), params.gamma,
                       params.max_log_scale, grad_tol, max_iters);
  }
  // Wide matrix: solve the transposed problem (u and v swap roles) so the
  // dense Schur block stays the smaller side.
  NewtonResult res =
      newton_impl(A.transposed(), Vec::Constant(A.cols(), beta * beta),
                  Vec::Constant(A.rows(), alpha * alpha), params.gamma,
                  params.max_log_scale, grad_tol, max_iters);
  std::swap(res.u, res.v);
  return res;
}

}  // namespace equil
