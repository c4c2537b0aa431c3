#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "equil/explicit_matrix.hpp"
#include "equil/params.hpp"

namespace equil {

/// One experiment's worth of configuration, shared by the CLI subcommands.
/// When matrix_path is set the instance is loaded from disk; otherwise it is
/// generated from (rows, cols, density, seed). The equilibration seed
/// follows `seed` unless overridden through `equil.seed` by the caller.
struct ExperimentConfig {
  Index rows = 2000;
  Index cols = 1000;
  double density = 0.01;
  std::uint64_t seed = 0;
  EquilibrationParams equil;
  int stride = 1;
  int cond_stride = 0;  // 0 = pick ~20 evenly spaced condition numbers
  std::vector<int> equil_budgets = {0, 10, 30, 100, 300};
  int solver_iters = 3000;
  double lsqr_tol = 1e-6;
  double ccp_gap_tol = 1e-4;
  std::string matrix_path;
  std::string out_path;
  std::string plot_path;
};

/// Random badly scaled sparse test instance: floor(density * m * n) distinct
/// positions drawn uniformly, standard normal values, then rows and columns
/// scaled by e^{u_i}, e^{v_j} with u, v ~ N(1, 1). The raw draws come from
/// fixed per-purpose streams of `seed`, so instances are reproducible across
/// platforms. Optional flags report structurally empty rows or columns
/// (possible at low density; such instances are singular).
ExplicitMatrix gen_matrix(Index rows, Index cols, double density,
                          std::uint64_t seed, bool* has_zero_row = nullptr,
                          bool* has_zero_col = nullptr);

/// Least-squares slope of log10(y) against log10(x), ignoring nonpositive
/// points. Used to summarize convergence curves.
double fit_loglog_slope(const std::vector<double>& x,
                        const std::vector<double>& y);

/// Stochastic equilibration trace: writes CSV with header
/// `iter,rel_gap,rms_error,cond_number`. rel_gap is (f - p_star)/f(0,0)
/// against the second-order reference solution (left empty when the
/// instance is too large for the reference solve); cond_number is filled on
/// the sparser cond_stride grid and empty elsewhere. A comment block with
/// the full configuration and the fitted log-log slope precedes the header.
void run_equilibration_experiment(const ExperimentConfig& config,
                                  std::ostream& out);

/// Least-squares benchmark: for each equilibration budget, solves A x = b
/// (b = A x_true, x_true standard normal) plain or preconditioned, writing
/// `variant,total_iter,rel_residual` rows where total iterations include the
/// equilibration prefix.
void run_lsqr_experiment(const ExperimentConfig& config, std::ostream& out);

/// Lasso benchmark: same layout with `variant,total_iter,rel_gap` rows, gap
/// measured against an accelerated proximal-gradient reference solution.
void run_ccp_experiment(const ExperimentConfig& config, std::ostream& out);

/// Data series for the minimal SVG plotter.
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  std::string color;  // any SVG color
};

/// Writes a small self-contained log-log SVG line chart. Nonpositive points
/// are dropped (they have no logarithm to plot).
void write_svg_loglog(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<PlotSeries>& series);

}  // namespace equil
