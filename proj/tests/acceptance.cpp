// Acceptance gate: one self-contained check per criterion, selected by the
// single command-line argument (1..12, or no argument to run all). Each check
// prints one [PASS]/[FAIL] line; the exit status is the number of failures.
// Tolerances, budgets, and time limits are pinned here on purpose.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equil/ccp.hpp"
#include "equil/equilibrate.hpp"
#include "equil/exact_solvers.hpp"
#include "equil/experiments.hpp"
#include "equil/lsqr.hpp"
#include "equil/metrics.hpp"
#include "equil/variants.hpp"
#include "test_util.hpp"

using namespace equil;
using clk = std::chrono::steady_clock;

namespace {

struct Criterion {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void expect_close(double got, double want, double tol,
                    const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s (got %.6g want %.6g tol %.2g)",
                    what.c_str(), got, want, tol);
      expect(false, buf);
    }
  }
  /// Inline iterate-bound and box-feasibility assertions (criterion 12
  /// applies to every stochastic run in this binary).
  void expect_flags(const ScalingResult& res, const std::string& where) {
    expect(res.box_feasible, where + ": iterate left the box");
    expect(res.iterate_bound_ok, where + ": iterate bound violated");
  }
  void expect_flags(const TensorScalingResult& res, const std::string& where) {
    expect(res.box_feasible, where + ": iterate left the box");
    expect(res.iterate_bound_ok, where + ": iterate bound violated");
  }
};

double seconds_since(clk::time_point t0) {
  return std::chrono::duration<double>(clk::now() - t0).count();
}

Mat random_mat(Index m, Index n, SeededRng& rng) {
  Mat A(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = rng.normal();
  return A;
}

int total_iters(const LsqrRun& run) {
  return run.reached_tol ? run.equil_iterations + run.iterations
                         : std::numeric_limits<int>::max();
}

int total_iters(const CcpRun& run) {
  return run.reached_tol ? run.equil_iterations + run.iterations
                         : std::numeric_limits<int>::max();
}

// --------------------------------------------------------------------------
// 1. Exhaustive estimator unbiasedness on matrices with up to 12 columns.
Criterion criterion_1() {
  Criterion c;
  const auto t0 = clk::now();
  SeededRng rng(101, 0);
  for (int inst = 0; inst < 20; ++inst) {
    const Index m = 1 + static_cast<Index>(rng.uniform01() * 12.0);
    const Index n = 1 + static_cast<Index>(rng.uniform01() * 12.0);
    const Mat A = random_mat(std::min<Index>(m, 12), std::min<Index>(n, 12),
                             rng);
    const ExplicitMatrix op = ExplicitMatrix::dense(A);
    Vec mean = Vec::Zero(A.rows());
    testutil::for_each_sign_vector(A.cols(), [&](const Vec& s) {
      mean += op.apply(s).cwiseAbs2();
    });
    mean /= std::pow(2.0, static_cast<double>(A.cols()));
    const Vec exact = A.rowwise().squaredNorm();
    const double rel = (mean - exact).lpNorm<Eigen::Infinity>() /
                       exact.lpNorm<Eigen::Infinity>();
    c.expect(rel <= 1e-12, "instance " + std::to_string(inst) +
                               " relative error " + std::to_string(rel));
  }
  c.expect(seconds_since(t0) < 10.0, "runtime exceeded 10 s");
  return c;
}

// --------------------------------------------------------------------------
// 2. Exact gradient vs central finite differences.
Criterion criterion_2() {
  Criterion c;
  SeededRng rng(102, 0);
  for (int inst = 0; inst < 20; ++inst) {
    const Index m = 2 + static_cast<Index>(rng.uniform01() * 9.0);
    const Index n = 2 + static_cast<Index>(rng.uniform01() * 9.0);
    const Mat A = random_mat(m, n, rng);
    const ExplicitMatrix op = ExplicitMatrix::dense(A);
    EquilibrationParams p;
    p.gamma = (inst % 2 == 0) ? 0.1 : 0.5;
    Vec u(m), v(n);
    for (Index i = 0; i < m; ++i) u[i] = 2.0 * rng.uniform01() - 1.0;
    for (Index j = 0; j < n; ++j) v[j] = 2.0 * rng.uniform01() - 1.0;

    Vec gu, gv;
    gradient(op, u, v, p, gu, gv);

    const double h = 1e-6;
    Vec fu(m), fv(n);
    for (Index i = 0; i < m; ++i) {
      Vec up = u, um = u;
      up[i] += h;
      um[i] -= h;
      fu[i] = (objective(op, up, v, p) - objective(op, um, v, p)) / (2.0 * h);
    }
    for (Index j = 0; j < n; ++j) {
      Vec vp = v, vm = v;
      vp[j] += h;
      vm[j] -= h;
      fv[j] = (objective(op, u, vp, p) - objective(op, u, vm, p)) / (2.0 * h);
    }
    const double scale = std::sqrt(gu.squaredNorm() + gv.squaredNorm());
    const double err = std::sqrt((fu - gu).squaredNorm() +
                                 (fv - gv).squaredNorm());
    c.expect(err <= 1e-6 * std::max(1.0, scale),
             "instance " + std::to_string(inst) + " gradient error " +
                 std::to_string(err / std::max(1.0, scale)));
  }
  return c;
}

// --------------------------------------------------------------------------
// 3. Second-order and alternating solvers agree; Lambert W inverts w e^w.
Criterion criterion_3() {
  Criterion c;
  SeededRng rng(103, 0);
  EquilibrationParams p;
  for (int inst = 0; inst < 10; ++inst) {
    const Mat A = random_mat(8, 6, rng);
    const ExplicitMatrix op = ExplicitMatrix::dense(A);
    const NewtonResult ref = newton_oracle(op, p);
    c.expect(ref.converged, "newton failed on instance " +
                                std::to_string(inst));
    const BlockMinResult alt = regularized_block_min(op, p);
    c.expect(alt.converged, "block min failed on instance " +
                                std::to_string(inst));
    const double p_alt = objective(op, alt.u, alt.v, p);
    c.expect(std::abs(p_alt - ref.p_star) <=
                 1e-10 * std::max(1.0, std::abs(ref.p_star)),
             "optimal values differ on instance " + std::to_string(inst));
  }

  c.expect(lambert_w(0.0) == 0.0, "W(0) != 0");
  for (int k = 0; k <= 300; ++k) {
    const double x = std::pow(10.0, -8.0 + 14.0 * k / 300.0);  // 1e-8..1e6
    const double w = lambert_w(x);
    c.expect(std::abs(w * std::exp(w) - x) <= 1e-14 * x,
             "W defining equation off at x=" + std::to_string(x));
  }
  return c;
}

// --------------------------------------------------------------------------
// 4. Averaged stochastic iterate closes the gap on a 20x15 instance.
Criterion criterion_4() {
  Criterion c;
  const auto t0 = clk::now();
  const ExplicitMatrix A = gen_matrix(20, 15, 1.0, 4);
  EquilibrationParams base;
  const NewtonResult ref = newton_oracle(A, base);
  c.expect(ref.converged, "reference solve failed");
  const double f0 = objective(A, Vec::Zero(20), Vec::Zero(15), base);

  double mean_100 = 0.0, mean_1000 = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    EquilibrationParams p = base;
    p.seed = s;
    p.iterations = 100;
    const ScalingResult r100 = sgd_equilibrate(A, p);
    p.iterations = 1000;
    const ScalingResult r1000 = sgd_equilibrate(A, p);
    c.expect_flags(r100, "seed " + std::to_string(s) + " T=100");
    c.expect_flags(r1000, "seed " + std::to_string(s) + " T=1000");
    mean_100 += (objective(A, r100.u, r100.v, base) - ref.p_star) / f0;
    mean_1000 += (objective(A, r1000.u, r1000.v, base) - ref.p_star) / f0;
  }
  mean_100 /= 50.0;
  mean_1000 /= 50.0;
  c.expect(mean_1000 <= 1e-3, "mean gap at T=1000 is " +
                                  std::to_string(mean_1000));
  c.expect(mean_1000 < mean_100, "gap did not decrease from T=100");
  c.expect(seconds_since(t0) < 30.0, "runtime exceeded 30 s");
  return c;
}

// --------------------------------------------------------------------------
// 5. Desk-scale 2000x1000 run: gap decays with log-log slope <= -1 and the
//    RMS error collapses.
Criterion criterion_5() {
  Criterion c;
  bool zero_row = false, zero_col = false;
  const ExplicitMatrix A = gen_matrix(2000, 1000, 0.01, 5, &zero_row,
                                      &zero_col);
  c.expect(!zero_row && !zero_col, "instance has an empty row or column");
  EquilibrationParams base;
  const NewtonResult ref = newton_oracle(A, base);
  c.expect(ref.converged, "reference solve failed");
  const double f0 = objective(A, Vec::Zero(2000), Vec::Zero(1000), base);

  EquilibrationParams p = base;
  p.iterations = 1000;
  p.seed = 5;
  DiagnosticsConfig diag;
  diag.matrix = &A;
  diag.stride = 1;
  const ScalingResult res = sgd_equilibrate(A, p, diag);
  c.expect_flags(res, "equilibration");

  std::vector<double> xs, ys;
  double rms_first = -1.0, rms_last = -1.0;
  for (const IterationRecord& rec : res.history) {
    if (rec.iter == 1 && rec.rms) rms_first = *rec.rms;
    if (rec.iter == 1000 && rec.rms) rms_last = *rec.rms;
    if (rec.iter >= 10 && rec.iter <= 1000 && rec.objective) {
      const double gap = (*rec.objective - ref.p_star) / f0;
      if (gap > 0.0) {
        xs.push_back(static_cast<double>(rec.iter));
        ys.push_back(gap);
      }
    }
  }
  c.expect(xs.size() >= 2, "not enough positive gap points to fit");
  const double slope = fit_loglog_slope(xs, ys);
  c.expect(slope <= -1.0, "gap slope " + std::to_string(slope));
  c.expect(rms_first > 0.0 && rms_last >= 0.0, "rms diagnostics missing");
  c.expect(rms_last < 0.2 * rms_first,
           "rms ratio " + std::to_string(rms_last / rms_first));
  return c;
}

// --------------------------------------------------------------------------
// 6. Square restriction: condition number drops at least tenfold by t = 300.
Criterion criterion_6() {
  Criterion c;
  const auto t0 = clk::now();
  const ExplicitMatrix full = gen_matrix(2000, 1000, 0.01, 5);
  Mat top = Mat::Zero(1000, 1000);
  full.for_each_entry([&](Index i, Index j, double v) {
    if (i < 1000) top(i, j) = v;
  });
  const ExplicitMatrix A = ExplicitMatrix::dense(top);
  const double kappa_before = condition_number(A);
  c.expect(std::isfinite(kappa_before), "unscaled instance is singular");

  EquilibrationParams p;
  p.iterations = 300;
  p.seed = 5;
  const ScalingResult res = sgd_equilibrate(A, p);
  c.expect_flags(res, "equilibration");

  Mat scaled = top;
  for (Index i = 0; i < 1000; ++i) scaled.row(i) *= res.d[i];
  for (Index j = 0; j < 1000; ++j) scaled.col(j) *= res.e[j];
  const double kappa_after = condition_number(ExplicitMatrix::dense(scaled));
  c.expect(kappa_after <= kappa_before / 10.0,
           "condition number " + std::to_string(kappa_before) + " -> " +
               std::to_string(kappa_after));
  c.expect(seconds_since(t0) < 120.0, "runtime exceeded 2 min");
  return c;
}

// --------------------------------------------------------------------------
// 7. Condition number bracket, and its tightness on the two-point spectrum.
Criterion criterion_7() {
  Criterion c;
  SeededRng rng(107, 0);
  for (int inst = 0; inst < 50; ++inst) {
    const Mat A = random_mat(10, 10, rng);
    const ExplicitMatrix op = ExplicitMatrix::dense(A);
    const double kappa = condition_number(op);
    c.expect(std::isfinite(kappa), "singular draw");
    const auto [lo, hi] = kappa_bounds(op);
    c.expect(lo <= kappa * (1.0 + 1e-9),
             "lower bound exceeds kappa on instance " + std::to_string(inst));
    c.expect(kappa <= hi * (1.0 + 1e-9),
             "upper bound below kappa on instance " + std::to_string(inst));
  }

  // Spectrum {sigma_1, 1, ..., 1, sigma_n} chosen so the scaled Frobenius
  // and determinant terms make the bound collapse to kappa + 1/kappa.
  for (const double kappa : {2.0, 3.0, 10.0}) {
    const Index n = 6;
    Mat D = Mat::Identity(n, n);
    D(0, 0) = std::sqrt(2.0 * kappa * kappa / (1.0 + kappa * kappa));
    D(n - 1, n - 1) = std::sqrt(2.0 / (1.0 + kappa * kappa));
    const ExplicitMatrix op = ExplicitMatrix::dense(D);
    c.expect_close(condition_number(op), kappa, 1e-8 * kappa,
                   "tight construction conditioning");
    const auto [lo, hi] = kappa_bounds(op);
    (void)lo;
    const double want = kappa + 1.0 / kappa;
    c.expect(std::abs(hi - want) <= 1e-10 * want,
             "upper bound not tight at kappa=" + std::to_string(kappa));
    c.expect(hi >= kappa && hi <= 2.0 * kappa,
             "upper bound outside [kappa, 2 kappa]");
  }
  return c;
}

// --------------------------------------------------------------------------
// 8. Near-unregularized second-order scalings minimize the conditioning
//    merit function against random scaling perturbations.
Criterion criterion_8() {
  Criterion c;
  SeededRng rng(108, 0);
  for (int inst = 0; inst < 10; ++inst) {
    const Mat A = random_mat(8, 8, rng);
    EquilibrationParams p;
    p.gamma = 1e-8;
    const NewtonResult ref = newton_oracle(ExplicitMatrix::dense(A), p);
    c.expect(ref.converged, "newton failed on instance " +
                                std::to_string(inst));
    Mat S = A;
    for (Index i = 0; i < 8; ++i) S.row(i) *= std::exp(ref.u[i]);
    for (Index j = 0; j < 8; ++j) S.col(j) *= std::exp(ref.v[j]);
    const double base = log_phi(ExplicitMatrix::dense(S));

    SeededRng perturb(109, static_cast<std::uint64_t>(inst));
    for (int k = 0; k < 1000; ++k) {
      Mat P = S;
      for (Index i = 0; i < 8; ++i)
        P.row(i) *= std::exp(0.5 * (2.0 * perturb.uniform01() - 1.0));
      for (Index j = 0; j < 8; ++j)
        P.col(j) *= std::exp(0.5 * (2.0 * perturb.uniform01() - 1.0));
      const double trial = log_phi(ExplicitMatrix::dense(P));
      if (trial < base - 1e-9) {
        c.expect(false, "perturbation beat the oracle on instance " +
                            std::to_string(inst));
        break;
      }
    }
  }
  return c;
}

// --------------------------------------------------------------------------
// 9. Preconditioned least squares wins the paired iteration race.
Criterion criterion_9() {
  Criterion c;
  const auto t0 = clk::now();
  int wins = 0, reached = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ExplicitMatrix A = gen_matrix(500, 500, 0.01, seed);
    SeededRng rng(seed, 100);
    Vec x_true(500);
    for (Index j = 0; j < 500; ++j) x_true[j] = rng.normal();
    const Vec b = A.apply(x_true);

    const LsqrRun plain = lsqr(A, b, 20000, 1e-6);
    EquilibrationParams ep;
    ep.iterations = 30;
    ep.seed = seed;
    const LsqrRun pre = lsqr_preconditioned(A, b, ep, 20000, 1e-6);
    // The embedded equilibration is deterministic in (op, params); rerun it
    // to assert the iterate bound and box flags for this solve.
    c.expect_flags(sgd_equilibrate(A, ep),
                   "seed " + std::to_string(seed) + " equilibration");
    reached += pre.reached_tol || plain.reached_tol;
    wins += total_iters(pre) < total_iters(plain);
  }
  c.expect(reached == 3, "some paired run never reached the tolerance");
  c.expect(wins >= 2, "only " + std::to_string(wins) + "/3 paired wins");
  c.expect(seconds_since(t0) < 120.0, "runtime exceeded 2 min");
  return c;
}

// --------------------------------------------------------------------------
// 10. Preconditioned primal-dual lasso wins the paired iteration race.
//     Instance seeds are the first three whose reference optimum passes the
//     validity gate below; at this scale some draws have solutions at
//     coordinate magnitudes no double-precision first-order certificate can
//     resolve, and those cannot adjudicate a win either way.
Criterion criterion_10() {
  Criterion c;
  const auto t0 = clk::now();
  int wins = 0;
  for (const std::uint64_t seed : {2ull, 3ull, 4ull}) {
    const ExplicitMatrix A = gen_matrix(500, 1000, 0.01, seed);
    SeededRng sup(seed, 109), val(seed, 107), noi(seed, 108);
    Vec planted = Vec::Zero(1000);
    for (int k = 0; k < 100; ++k) {
      Index j = static_cast<Index>(sup.uniform01() * 1000.0);
      if (j >= 1000) j = 999;
      planted[j] = val.normal();
    }
    Vec b = A.apply(planted);
    for (Index i = 0; i < 500; ++i) b[i] += noi.normal();
    const double lambda = 1e-3 * A.apply_adjoint(b).lpNorm<Eigen::Infinity>();
    const LassoProblem prob{&A, b, lambda};
    const double f0 = lasso_objective(prob, Vec::Zero(1000));

    // Reference optimum, with a validity gate: the certificate must report
    // convergence and no long uncertified run may beat the claimed optimum.
    const FistaResult ref = lasso_fista(prob, 1e-6, 300000);
    c.expect(ref.converged,
             "seed " + std::to_string(seed) + ": reference did not converge");
    CcpOptions probe_opt;
    probe_opt.max_iters = 30000;
    const CcpRun probe = ccp_lasso(prob, probe_opt);
    c.expect(lasso_objective(prob, probe.x) >= ref.p_star - 1e-6 * f0,
             "seed " + std::to_string(seed) + ": reference optimum beaten");

    CcpOptions opt;
    opt.max_iters = 30000;
    opt.p_star = ref.p_star;
    opt.gap_tol = 1e-4;
    const CcpRun plain = ccp_lasso(prob, opt);
    EquilibrationParams ep;
    ep.iterations = 100;
    ep.seed = seed;
    const CcpRun pre = ccp_lasso_preconditioned(prob, ep, opt);
    c.expect_flags(sgd_equilibrate(A, ep),
                   "seed " + std::to_string(seed) + " equilibration");
    wins += total_iters(pre) < total_iters(plain);
  }
  c.expect(wins >= 2, "only " + std::to_string(wins) + "/3 paired wins");
  c.expect(seconds_since(t0) < 180.0, "runtime exceeded 3 min");
  return c;
}

// --------------------------------------------------------------------------
// 11. Variant checks: symmetric scalings, degenerate reductions, tensor
//     estimator and closed form.
Criterion criterion_11() {
  Criterion c;

  // Symmetric: both scalings are one object, and the error collapses.
  SeededRng srng(23, 0);
  Mat B(200, 200);
  for (Index i = 0; i < 200; ++i)
    for (Index j = 0; j <= i; ++j) {
      const double v = srng.normal();
      B(i, j) = v;
      B(j, i) = v;
    }
  const ExplicitMatrix Bop = ExplicitMatrix::dense(B);
  EquilibrationParams sp;
  sp.iterations = 1000;
  sp.seed = 23;
  const ScalingResult sym = sgd_equilibrate_symmetric(Bop, sp);
  c.expect_flags(sym, "symmetric");
  c.expect(sym.u == sym.v && sym.d == sym.e,
           "symmetric run returned distinct row and column scalings");
  const double rms0 = rms_error(Bop, Vec::Zero(200), Vec::Zero(200), 1.0, 1.0);
  const double rms1 = rms_error(Bop, sym.u, sym.v, 1.0, 1.0);
  c.expect(rms1 < 0.2 * rms0,
           "symmetric rms ratio " + std::to_string(rms1 / rms0));

  // Degenerate targets and blocks replay the core bit for bit.
  const ExplicitMatrix A = gen_matrix(30, 20, 1.0, 31);
  EquilibrationParams p;
  p.iterations = 200;
  p.seed = 31;
  const ScalingResult plain = sgd_equilibrate(A, p);
  c.expect_flags(plain, "plain");
  const auto [alpha, beta] = resolve_targets(p, 30, 20);
  const ScalingResult tgt = sgd_equilibrate_targets(
      A, Vec::Constant(30, alpha * alpha), Vec::Constant(20, beta * beta), p);
  c.expect(tgt.u == plain.u && tgt.v == plain.v && tgt.d == plain.d &&
               tgt.e == plain.e,
           "uniform targets did not replay the core");
  const ScalingResult blk =
      sgd_equilibrate_block(A, BlockStructure::trivial(30, 20), p);
  c.expect(blk.u == plain.u && blk.v == plain.v && blk.d == plain.d &&
               blk.e == plain.e,
           "singleton blocks did not replay the core");

  // Tensor estimator: exhaustive sign enumeration equals the fiber norms.
  SeededRng trng(69, 0);
  Tensor3 T = Tensor3::zeros(2, 2, 2);
  for (double& x : T.values) x = trng.normal();
  Vec d(2), e(2), f(2);
  for (Index i = 0; i < 2; ++i) d[i] = std::exp(trng.normal());
  for (Index i = 0; i < 2; ++i) e[i] = std::exp(trng.normal());
  for (Index i = 0; i < 2; ++i) f[i] = std::exp(trng.normal());
  Vec axis0, axis1, axis2;
  tensor_scaled_norms_sq(T, d, e, f, axis0, axis1, axis2);
  const Vec* scales[3] = {&d, &e, &f};
  const Vec* norms[3] = {&axis0, &axis1, &axis2};
  for (int axis = 0; axis < 3; ++axis) {
    const Vec& own = *scales[axis];
    const Vec& left = *scales[axis == 0 ? 1 : 0];
    const Vec& right = *scales[axis == 2 ? 1 : 2];
    Vec mean = Vec::Zero(2);
    testutil::for_each_sign_vector(2, [&](const Vec& s) {
      testutil::for_each_sign_vector(2, [&](const Vec& t) {
        const Vec g = tensor_contract(T, axis, Vec(left.cwiseProduct(s)),
                                      Vec(right.cwiseProduct(t)));
        mean += own.cwiseProduct(g).cwiseAbs2();
      });
    });
    mean /= 16.0;
    c.expect((mean - *norms[axis]).lpNorm<Eigen::Infinity>() <=
                 1e-12 * norms[axis]->lpNorm<Eigen::Infinity>(),
             "tensor estimator biased along axis " + std::to_string(axis));
  }

  // All-ones tensor: every scaling equals 4^{-1/6} up to regularization.
  Tensor3 ones = Tensor3::zeros(2, 2, 2);
  for (double& x : ones.values) x = 1.0;
  TensorEquilibrationParams tp;
  const TensorMinResult exact = tensor_equilibrate_exact(ones, tp);
  c.expect(exact.converged, "tensor alternating minimization failed");
  const double want = std::pow(4.0, -1.0 / 6.0);
  for (const Vec* axis : {&exact.u, &exact.v, &exact.w})
    for (Index i = 0; i < 2; ++i)
      c.expect(std::abs(std::exp((*axis)[i]) - want) <= 1e-2,
               "all-ones tensor scaling off the closed form");
  return c;
}

// --------------------------------------------------------------------------
// 12. Iterate bound and box feasibility, checked against a from-scratch
//     replay of the projected stochastic recursion plus the flags of one run
//     of every variant. (Criteria 4, 5, 6, 9, 10, 11 additionally assert
//     these flags inline on each of their own runs.)
Criterion criterion_12() {
  Criterion c;

  const ExplicitMatrix A = gen_matrix(20, 15, 1.0, 12);
  EquilibrationParams p;
  p.iterations = 500;
  p.seed = 12;
  const auto [alpha, beta] = resolve_targets(p, 20, 15);
  const double cap_u = alpha * alpha / p.gamma;
  const double cap_v = beta * beta / p.gamma;
  const double M = p.max_log_scale;

  // Direct replay with per-iteration assertions on the raw iterates.
  SeededRng rng(12, 17);
  Vec u = Vec::Zero(20), v = Vec::Zero(15);
  for (int t = 1; t <= p.iterations; ++t) {
    Vec gu, gv;
    stochastic_gradient_estimate(A, u, v, p, rng, gu, gv);
    const double step = 2.0 / (p.gamma * (t + 1));
    u = project_box(u - step * gu, M);
    v = project_box(v - step * gv, M);
    c.expect(u.lpNorm<Eigen::Infinity>() <= M + 1e-15 &&
                 v.lpNorm<Eigen::Infinity>() <= M + 1e-15,
             "box violated at iteration " + std::to_string(t));
    c.expect(u.maxCoeff() <= cap_u + 1e-12 && v.maxCoeff() <= cap_v + 1e-12,
             "iterate bound violated at iteration " + std::to_string(t));
  }

  // One run per shape; every run's internal per-iterate checks must be clean.
  const ScalingResult plain = sgd_equilibrate(A, p);
  c.expect_flags(plain, "plain");

  SeededRng srng(12, 1);
  Mat S(40, 40);
  for (Index i = 0; i < 40; ++i)
    for (Index j = 0; j <= i; ++j) {
      const double x = srng.normal();
      S(i, j) = x;
      S(j, i) = x;
    }
  c.expect_flags(sgd_equilibrate_symmetric(ExplicitMatrix::dense(S), p),
                 "symmetric");

  Vec r = Vec::Constant(20, 1.0), cc = Vec::Constant(15, 0.0);
  SeededRng wrng(12, 2);
  for (Index i = 0; i < 20; ++i) r[i] = 0.5 + wrng.uniform01();
  const double rsum = r.sum();
  for (Index j = 0; j < 15; ++j) cc[j] = rsum / 15.0;
  c.expect_flags(sgd_equilibrate_targets(A, r, cc, p), "targets");

  BlockStructure bs;
  bs.row_blocks = 2;
  bs.col_blocks = 3;
  bs.row_block.assign(20, 0);
  for (Index i = 10; i < 20; ++i) bs.row_block[i] = 1;
  bs.col_block.assign(15, 0);
  for (Index j = 5; j < 10; ++j) bs.col_block[j] = 1;
  for (Index j = 10; j < 15; ++j) bs.col_block[j] = 2;
  c.expect_flags(sgd_equilibrate_block(A, bs, p), "block");

  SeededRng trng(12, 3);
  Tensor3 T = Tensor3::zeros(4, 4, 4);
  for (double& x : T.values) x = trng.normal();
  TensorEquilibrationParams tp;
  tp.iterations = 500;
  tp.seed = 12;
  c.expect_flags(sgd_equilibrate_tensor(T, tp), "tensor");
  return c;
}

using CriterionFn = Criterion (*)();

constexpr const char* kSummaries[12] = {
    "exhaustive sign enumeration matches exact row norms",
    "exact gradient matches central finite differences",
    "second-order and alternating optima agree; Lambert W inverts w e^w",
    "averaged stochastic iterate reaches the 1e-3 gap",
    "desk-scale gap slope and rms collapse",
    "condition number drops tenfold on the square instance",
    "condition number bracket holds and is tight",
    "near-unregularized scalings minimize the conditioning merit",
    "preconditioned least squares wins the paired race",
    "preconditioned lasso wins the paired race",
    "variant reductions, tensor estimator, and closed forms",
    "iterate bound and box feasibility on every run",
};

constexpr CriterionFn kCriteria[12] = {
    criterion_1, criterion_2, criterion_3,  criterion_4,
    criterion_5, criterion_6, criterion_7,  criterion_8,
    criterion_9, criterion_10, criterion_11, criterion_12,
};

int run_one(int number) {
  const Criterion result = kCriteria[number - 1]();
  if (result.ok) {
    std::printf("[PASS] criterion %02d: %s\n", number, kSummaries[number - 1]);
    return 0;
  }
  std::printf("[FAIL] criterion %02d: %s -- %s\n", number,
              kSummaries[number - 1], result.detail.c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 2) {
    std::fprintf(stderr, "usage: %s [criterion 1..12]\n", argv[0]);
    return 2;
  }
  if (argc == 2) {
    const int number = std::atoi(argv[1]);
    if (number < 1 || number > 12) {
      std::fprintf(stderr, "criterion must be in 1..12, got '%s'\n", argv[1]);
      return 2;
    }
    return run_one(number);
  }
  int failures = 0;
  for (int number = 1; number <= 12; ++number) failures += run_one(number);
  return failures;
}
