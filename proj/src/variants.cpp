#include "equil/variants.hpp"

#include <cmath>

#include "equil/metrics.hpp"
#include "equil/streams.hpp"

namespace equil {

namespace {

// Spot check <Ax, y> == <x, A^T y> on a few random probes; a cheap guard
// against passing a nonsymmetric operator to the symmetric solver.
void check_symmetry(const LinearOperator& op, std::uint64_t seed) {
  detail::require(op.rows() == op.cols(),
                  "sgd_equilibrate_symmetric: operator must be square");
  SeededRng rng(seed, streams::kSymmetryCheck);
  const Index n = op.rows();
  for (int probe = 0; probe < 3; ++probe) {
    Vec x(n), y(n);
    for (Index i = 0; i < n; ++i) x[i] = rng.normal();
    for (Index i = 0; i < n; ++i) y[i] = rng.normal();
    const Vec ax = op.apply(x);
    const Vec ay = op.apply(y);
    const double lhs = ax.dot(y);
    const double rhs = x.dot(ay);
    const double scale = ax.norm() * y.norm() + x.norm() * ay.norm() + 1e-30;
    detail::require(std::abs(lhs - rhs) <= 1e-10 * scale,
                    "sgd_equilibrate_symmetric: operator failed symmetry check");
  }
}

}  // namespace

ScalingResult sgd_equilibrate_symmetric(const LinearOperator& op,
                                        const EquilibrationParams& params,
                                        const DiagnosticsConfig& diag) {
  validate_params(params);
  check_symmetry(op, params.seed);
  const Index n = op.rows();
  const auto [alpha, beta] = resolve_targets(params, n, n);
  detail::require(std::abs(alpha - beta) <= 1e-12 * std::max(alpha, beta),
                  "sgd_equilibrate_symmetric: targets must coincide");
  if (diag.matrix != nullptr) {
    detail::require(diag.matrix->rows() == n && diag.matrix->cols() == n,
                    "sgd_equilibrate_symmetric: diagnostics shape mismatch");
    detail::require(diag.stride > 0,
                    "sgd_equilibrate_symmetric: stride must be positive");
  }

  const CountingOperator counted(op);
  SeededRng rng(params.seed, streams::kSgdProbes);

  std::vector<SgdBlock> blocks(1);
  blocks[0] = {n, Vec::Constant(n, alpha * alpha)};

  const auto estimator = [&](const std::vector<Vec>& logs, SeededRng& r,
                             std::vector<Vec>& est) {
    const Vec d = logs[0].array().exp();
    const ScaledOperator scaled(counted, d, d);
    est[0] = estimate_row_norms_sq(scaled, r);
  };

  ScalingResult result;
  result.alpha = alpha;
  result.beta = alpha;

  std::function<void(int, const std::vector<Vec>&)> on_iter;
  if (diag.matrix != nullptr) {
    const double a2 = alpha * alpha;
    on_iter = [&, a2](int t, const std::vector<Vec>& avg) {
      if (t != 0 && t % diag.stride != 0) return;
      IterationRecord rec;
      rec.iter = t;
      // Symmetric objective counts each unordered pair once.
      rec.objective = 0.5 * objective_weighted(*diag.matrix, avg[0], avg[0],
                                               Vec::Constant(n, a2),
                                               Vec::Constant(n, a2),
                                               params.gamma);
      rec.rms = rms_error(*diag.matrix, avg[0], avg[0], alpha, alpha);
      if (diag.cond_stride > 0 && t % diag.cond_stride == 0) {
        const Vec d = avg[0].array().exp();
        rec.cond = condition_number(
            ExplicitMatrix::dense(diag.matrix->scaled_dense(d, d)));
      }
      result.history.push_back(std::move(rec));
    };
  }

  SgdOutcome outcome =
      run_projected_sgd(blocks, estimator, params.gamma, params.max_log_scale,
                        params.iterations, rng, on_iter);

  result.u = outcome.average[0];
  result.v = result.u;
  result.d = result.u.array().exp();
  result.e = result.d;
  result.box_feasible = outcome.box_feasible;
  result.iterate_bound_ok = outcome.iterate_bound_ok;
  result.apply_count = counted.apply_count();
  result.adjoint_count = counted.adjoint_count();
  return result;
}

ScalingResult sgd_equilibrate_targets(const LinearOperator& op, const Vec& r,
                                      const Vec& c,
                                      const EquilibrationParams& params,
                                      const DiagnosticsConfig& diag) {
  detail::require(r.size() == op.rows() && c.size() == op.cols(),
                  "sgd_equilibrate_targets: target length mismatch");
  detail::require((r.array() > 0.0).all() && (c.array() > 0.0).all(),
                  "sgd_equilibrate_targets: targets must be positive");
  const double sum_r = r.sum();
  const double sum_c = c.sum();
  detail::require(std::abs(sum_r - sum_c) <= 1e-8 * std::max(sum_r, sum_c),
                  "sgd_equilibrate_targets: sum(r) == sum(c) violated");
  return internal::sgd_row_col(op, r, c, params, diag, 0.0, 0.0);
}

BlockStructure BlockStructure::trivial(Index rows, Index cols) {
  BlockStructure s;
  s.row_block.resize(static_cast<std::size_t>(rows));
  s.col_block.resize(static_cast<std::size_t>(cols));
  for (Index i = 0; i < rows; ++i) s.row_block[static_cast<std::size_t>(i)] = i;
  for (Index j = 0; j < cols; ++j) s.col_block[static_cast<std::size_t>(j)] = j;
  s.row_blocks = rows;
  s.col_blocks = cols;
  return s;
}

void BlockStructure::validate(Index rows, Index cols) const {
  detail::require(static_cast<Index>(row_block.size()) == rows &&
                      static_cast<Index>(col_block.size()) == cols,
                  "BlockStructure: assignment length mismatch");
  detail::require(row_blocks > 0 && col_blocks > 0,
                  "BlockStructure: block counts must be positive");
  std::vector<bool> seen_row(static_cast<std::size_t>(row_blocks), false);
  std::vector<bool> seen_col(static_cast<std::size_t>(col_blocks), false);
  for (Index b : row_block) {
    detail::require(b >= 0 && b < row_blocks,
                    "BlockStructure: row block index out of range");
    seen_row[static_cast<std::size_t>(b)] = true;
  }
  for (Index b : col_block) {
    detail::require(b >= 0 && b < col_blocks,
                    "BlockStructure: col block index out of range");
    seen_col[static_cast<std::size_t>(b)] = true;
  }
  for (bool s : seen_row)
    detail::require(s, "BlockStructure: empty row block");
  for (bool s : seen_col)
    detail::require(s, "BlockStructure: empty col block");
}

ScalingResult sgd_equilibrate_block(const LinearOperator& op,
                                    const BlockStructure& structure,
                                    const EquilibrationParams& params,
                                    const DiagnosticsConfig& diag) {
  validate_params(params);
  structure.validate(op.rows(), op.cols());
  const Index m = op.rows();
  const Index n = op.cols();
  const auto [alpha, beta] = resolve_targets(params, m, n);

  // Aggregate targets: a block's squared norm target scales with its size.
  Vec row_count = Vec::Zero(structure.row_blocks);
  Vec col_count = Vec::Zero(structure.col_blocks);
  for (Index i = 0; i < m; ++i)
    row_count[structure.row_block[static_cast<std::size_t>(i)]] += 1.0;
  for (Index j = 0; j < n; ++j)
    col_count[structure.col_block[static_cast<std::size_t>(j)]] += 1.0;

  const CountingOperator counted(op);
  SeededRng rng(params.seed, streams::kSgdProbes);

  std::vector<SgdBlock> blocks(2);
  blocks[0] = {structure.row_blocks, (alpha * alpha) * row_count};
  blocks[1] = {structure.col_blocks, (beta * beta) * col_count};

  const auto expand = [](const Vec& compact, const std::vector<Index>& map) {
    Vec full(static_cast<Index>(map.size()));
    for (std::size_t i = 0; i < map.size(); ++i)
      full[static_cast<Index>(i)] = compact[map[i]];
    return full;
  };

  const auto estimator = [&](const std::vector<Vec>& logs, SeededRng& r,
                             std::vector<Vec>& est) {
    const Vec d = expand(logs[0], structure.row_block).array().exp();
    const Vec e = expand(logs[1], structure.col_block).array().exp();
    const ScaledOperator scaled(counted, d, e);
    const AdjointOperator adj(scaled);
    const Vec row_est = estimate_row_norms_sq(scaled, r);
    const Vec col_est = estimate_row_norms_sq(adj, r);
    est[0] = Vec::Zero(structure.row_blocks);
    est[1] = Vec::Zero(structure.col_blocks);
    for (Index i = 0; i < row_est.size(); ++i)
      est[0][structure.row_block[static_cast<std::size_t>(i)]] += row_est[i];
    for (Index j = 0; j < col_est.size(); ++j)
      est[1][structure.col_block[static_cast<std::size_t>(j)]] += col_est[j];
  };

  ScalingResult result;
  result.alpha = alpha;
  result.beta = beta;

  std::function<void(int, const std::vector<Vec>&)> on_iter;
  if (diag.matrix != nullptr) {
    detail::require(diag.matrix->rows() == m && diag.matrix->cols() == n,
                    "sgd_equilibrate_block: diagnostics shape mismatch");
    detail::require(diag.stride > 0,
                    "sgd_equilibrate_block: stride must be positive");
    on_iter = [&](int t, const std::vector<Vec>& avg) {
      if (t != 0 && t % diag.stride != 0) return;
      IterationRecord rec;
      rec.iter = t;
      const Vec u_full = expand(avg[0], structure.row_block);
      const Vec v_full = expand(avg[1], structure.col_block);
      rec.objective = objective_weighted(
          *diag.matrix, u_full, v_full, Vec::Constant(m, alpha * alpha),
          Vec::Constant(n, beta * beta), params.gamma);
      rec.rms = rms_error(*diag.matrix, u_full, v_full, alpha, beta);
      result.history.push_back(std::move(rec));
    };
  }

  SgdOutcome outcome =
      run_projected_sgd(blocks, estimator, params.gamma, params.max_log_scale,
                        params.iterations, rng, on_iter);

  result.u = expand(outcome.average[0], structure.row_block);
  result.v = expand(outcome.average[1], structure.col_block);
  result.d = result.u.array().exp();
  result.e = result.v.array().exp();
  result.box_feasible = outcome.box_feasible;
  result.iterate_bound_ok = outcome.iterate_bound_ok;
  result.apply_count = counted.apply_count();
  result.adjoint_count = counted.adjoint_count();
  return result;
}

Tensor3 Tensor3::zeros(Index m, Index n, Index p) {
  detail::require(m > 0 && n > 0 && p > 0,
                  "Tensor3: dimensions must be positive");
  Tensor3 t;
  t.m = m;
  t.n = n;
  t.p = p;
  t.values.assign(static_cast<std::size_t>(m * n * p), 0.0);
  return t;
}

double& Tensor3::at(Index i, Index j, Index k) {
  return values[static_cast<std::size_t>((i * n + j) * p + k)];
}

double Tensor3::at(Index i, Index j, Index k) const {
  return values[static_cast<std::size_t>((i * n + j) * p + k)];
}

Vec tensor_contract(const Tensor3& T, int free_axis, const Mat& X) {
  detail::require(free_axis >= 0 && free_axis <= 2,
                  "tensor_contract: free_axis must be 0, 1, or 2");
  Vec y;
  if (free_axis == 0) {
    detail::require(X.rows() == T.n && X.cols() == T.p,
                    "tensor_contract: matrix shape mismatch");
    y = Vec::Zero(T.m);
    for (Index i = 0; i < T.m; ++i)
      for (Index j = 0; j < T.n; ++j)
        for (Index k = 0; k < T.p; ++k) y[i] += T.at(i, j, k) * X(j, k);
  } else if (free_axis == 1) {
    detail::require(X.rows() == T.m && X.cols() == T.p,
                    "tensor_contract: matrix shape mismatch");
    y = Vec::Zero(T.n);
    for (Index i = 0; i < T.m; ++i)
      for (Index j = 0; j < T.n; ++j)
        for (Index k = 0; k < T.p; ++k) y[j] += T.at(i, j, k) * X(i, k);
  } else {
    detail::require(X.rows() == T.m && X.cols() == T.n,
                    "tensor_contract: matrix shape mismatch");
    y = Vec::Zero(T.p);
    for (Index i = 0; i < T.m; ++i)
      for (Index j = 0; j < T.n; ++j)
        for (Index k = 0; k < T.p; ++k) y[k] += T.at(i, j, k) * X(i, j);
  }
  return y;
}

Vec tensor_contract(const Tensor3& T, int free_axis, const Vec& a,
                    const Vec& b) {
  detail::require(free_axis >= 0 && free_axis <= 2,
                  "tensor_contract: free_axis must be 0, 1, or 2");
  Vec y;
  if (free_axis == 0) {
    detail::require(a.size() == T.n && b.size() == T.p,
                    "tensor_contract: vector length mismatch");
    y = Vec::Zero(T.m);
    for (Index i = 0; i < T.m; ++i)
      for (Index j = 0; j < T.n; ++j)
        for (Index k = 0; k < T.p; ++k) y[i] += T.at(i, j, k) * a[j] * b[k];
  } else if (free_axis == 1) {
    detail::require(a.size() == T.m && b.size() == T.p,
                    "tensor_contract: vector length mismatch");
    y = Vec::Zero(T.n);
    for (Index i = 0; i < T.m; ++i)
      for (Index j = 0; j < T.n; ++j)
        for (Index k = 0; k < T.p; ++k) y[j] += T.at(i, j, k) * a[i] * b[k];
  } else {
    detail::require(a.size() == T.m && b.size() == T.n,
                    "tensor_contract: vector length mismatch");
    y = Vec::Zero(T.p);
    for (Index i = 0; i < T.m; ++i)
      for (Index j = 0; j < T.n; ++j)
        for (Index k = 0; k < T.p; ++k) y[k] += T.at(i, j, k) * a[i] * b[j];
  }
  return y;
}

void tensor_scaled_norms_sq(const Tensor3& T, const Vec& d, const Vec& e,
                            const Vec& f, Vec& axis0, Vec& axis1, Vec& axis2) {
  detail::require(d.size() == T.m && e.size() == T.n && f.size() == T.p,
                  "tensor_scaled_norms_sq: scaling length mismatch");
  axis0 = Vec::Zero(T.m);
  axis1 = Vec::Zero(T.n);
  axis2 = Vec::Zero(T.p);
  for (Index i = 0; i < T.m; ++i) {
    for (Index j = 0; j < T.n; ++j) {
      for (Index k = 0; k < T.p; ++k) {
        const double s = d[i] * T.at(i, j, k) * e[j] * f[k];
        const double s2 = s * s;
        axis0[i] += s2;
        axis1[j] += s2;
        axis2[k] += s2;
      }
    }
  }
}

ResolvedTensorTargets resolve_tensor_targets(
    const TensorEquilibrationParams& params, Index m, Index n, Index p) {
  detail::require(params.alpha >= 0.0 && params.beta >= 0.0 &&
                      params.tau >= 0.0,
                  "tensor targets must be positive (or 0 for auto)");
  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  const double dp = static_cast<double>(p);
  const bool any_auto =
      params.alpha == 0.0 || params.beta == 0.0 || params.tau == 0.0;
  if (any_auto) {
    detail::require(params.alpha == 0.0 && params.beta == 0.0 &&
                        params.tau == 0.0,
                    "tensor targets: give all three or none");
    const double s = std::cbrt(dm * dn * dp);
    return {std::sqrt(s / dm), std::sqrt(s / dn), std::sqrt(s / dp)};
  }
  const double a = dm * params.alpha * params.alpha;
  const double b = dn * params.beta * params.beta;
  const double c = dp * params.tau * params.tau;
  const double top = std::max({a, b, c});
  detail::require(std::abs(a - b) <= 1e-8 * top &&
                      std::abs(b - c) <= 1e-8 * top,
                  "tensor targets: m a^2 == n b^2 == p t^2 violated");
  return {params.alpha, params.beta, params.tau};
}

TensorScalingResult sgd_equilibrate_tensor(
    const Tensor3& T, const TensorEquilibrationParams& params) {
  detail::require(params.gamma > 0.0, "tensor params: gamma must be positive");
  detail::require(params.max_log_scale > 0.0,
                  "tensor params: max_log_scale must be positive");
  detail::require(params.iterations >= 0,
                  "tensor params: iterations must be nonnegative");
  const auto targets = resolve_tensor_targets(params, T.m, T.n, T.p);

  SeededRng rng(params.seed, streams::kSgdProbes);

  std::vector<SgdBlock> blocks(3);
  blocks[0] = {T.m, Vec::Constant(T.m, targets.alpha * targets.alpha)};
  blocks[1] = {T.n, Vec::Constant(T.n, targets.beta * targets.beta)};
  blocks[2] = {T.p, Vec::Constant(T.p, targets.tau * targets.tau)};

  const auto estimator = [&](const std::vector<Vec>& logs, SeededRng& r,
                             std::vector<Vec>& est) {
    const Vec d = logs[0].array().exp();
    const Vec e = logs[1].array().exp();
    const Vec f = logs[2].array().exp();
    {
      const Vec s = rademacher(T.n, r);
      const Vec t = rademacher(T.p, r);
      const Vec y = tensor_contract(T, 0, e.cwiseProduct(s), f.cwiseProduct(t));
      est[0] = (d.cwiseProduct(y)).cwiseAbs2();
    }
    {
      const Vec s = rademacher(T.m, r);
      const Vec t = rademacher(T.p, r);
      const Vec y = tensor_contract(T, 1, d.cwiseProduct(s), f.cwiseProduct(t));
      est[1] = (e.cwiseProduct(y)).cwiseAbs2();
    }
    {
      const Vec s = rademacher(T.m, r);
      const Vec t = rademacher(T.n, r);
      const Vec y = tensor_contract(T, 2, d.cwiseProduct(s), e.cwiseProduct(t));
      est[2] = (f.cwiseProduct(y)).cwiseAbs2();
    }
  };

  SgdOutcome outcome =
      run_projected_sgd(blocks, estimator, params.gamma, params.max_log_scale,
                        params.iterations, rng);

  TensorScalingResult result;
  result.alpha = targets.alpha;
  result.beta = targets.beta;
  result.tau = targets.tau;
  result.u = std::move(outcome.average[0]);
  result.v = std::move(outcome.average[1]);
  result.w = std::move(outcome.average[2]);
  result.d = result.u.array().exp();
  result.e = result.v.array().exp();
  result.f = result.w.array().exp();
  result.box_feasible = outcome.box_feasible;
  result.iterate_bound_ok = outcome.iterate_bound_ok;
  return result;
}

}  // namespace equil
