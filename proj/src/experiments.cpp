#include "equil/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "equil/ccp.hpp"
#include "equil/equilibrate.hpp"
#include "equil/exact_solvers.hpp"
#include "equil/lsqr.hpp"
#include "equil/matrix_market.hpp"
#include "equil/metrics.hpp"
#include "equil/rng.hpp"
#include "equil/streams.hpp"

namespace equil {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Uniform sample of `count` distinct cells from [0, total), Floyd's
// algorithm: O(count) draws, no rejection loop.
std::vector<long long> sample_distinct_cells(long long total, long long count,
                                             SeededRng& rng) {
  std::vector<bool> taken(static_cast<std::size_t>(total), false);
  std::vector<long long> cells;
  cells.reserve(static_cast<std::size_t>(count));
  for (long long j = total - count; j < total; ++j) {
    const long long t = static_cast<long long>(
        rng.uniform_index(static_cast<std::uint64_t>(j + 1)));
    if (taken[static_cast<std::size_t>(t)]) {
      taken[static_cast<std::size_t>(j)] = true;
      cells.push_back(j);
    } else {
      taken[static_cast<std::size_t>(t)] = true;
      cells.push_back(t);
    }
  }
  std::sort(cells.begin(), cells.end());
  return cells;
}

ExplicitMatrix instance_matrix(const ExperimentConfig& config) {
  if (!config.matrix_path.empty()) {
    return read_matrix_market_file(config.matrix_path);
  }
  return gen_matrix(config.rows, config.cols, config.density, config.seed);
}

EquilibrationParams equil_params_for(const ExperimentConfig& config) {
  EquilibrationParams p = config.equil;
  p.seed = config.seed;
  return p;
}

void config_comment(const ExperimentConfig& config, const ExplicitMatrix& A,
                    std::ostream& out) {
  out << "# rows=" << A.rows() << " cols=" << A.cols()
      << " density=" << fmt(config.density) << " seed=" << config.seed;
  if (!config.matrix_path.empty()) out << " matrix=" << config.matrix_path;
  const auto [alpha, beta] =
      resolve_targets(config.equil, A.rows(), A.cols());
  out << "\n# alpha=" << fmt(alpha) << " beta=" << fmt(beta)
      << " gamma=" << fmt(config.equil.gamma)
      << " max_log_scale=" << fmt(config.equil.max_log_scale)
      << " iters=" << config.equil.iterations << " stride=" << config.stride
      << "\n";
}

}  // namespace

ExplicitMatrix gen_matrix(Index rows, Index cols, double density,
                          std::uint64_t seed, bool* has_zero_row,
                          bool* has_zero_col) {
  detail::require(rows > 0 && cols > 0, "gen_matrix: dimensions must be positive");
  detail::require(density > 0.0 && density <= 1.0,
                  "gen_matrix: density must be in (0, 1]");
  const long long total = static_cast<long long>(rows) * cols;
  detail::require(total <= (1LL << 28),
                  "gen_matrix: instance too large to index densely");
  const long long count =
      static_cast<long long>(std::floor(density * static_cast<double>(rows) *
                                        static_cast<double>(cols)));
  detail::require(count >= 1, "gen_matrix: density rounds to zero entries");

  SeededRng pos_rng(seed, streams::kMatrixPositions);
  const std::vector<long long> cells =
      sample_distinct_cells(total, count, pos_rng);

  SeededRng val_rng(seed, streams::kMatrixValues);
  SeededRng row_rng(seed, streams::kRowScales);
  SeededRng col_rng(seed, streams::kColScales);

  Vec row_scale(rows), col_scale(cols);
  for (Index i = 0; i < rows; ++i) row_scale[i] = std::exp(1.0 + row_rng.normal());
  for (Index j = 0; j < cols; ++j) col_scale[j] = std::exp(1.0 + col_rng.normal());

  std::vector<ExplicitMatrix::Entry> entries;
  entries.reserve(cells.size());
  for (long long cell : cells) {
    const Index i = static_cast<Index>(cell / cols);
    const Index j = static_cast<Index>(cell % cols);
    entries.push_back({i, j, row_scale[i] * val_rng.normal() * col_scale[j]});
  }
  ExplicitMatrix A = ExplicitMatrix::sparse(rows, cols, std::move(entries));

  if (has_zero_row != nullptr || has_zero_col != nullptr) {
    const Vec r = A.row_norms_sq();
    const Vec c = A.col_norms_sq();
    if (has_zero_row != nullptr) *has_zero_row = (r.array() == 0.0).any();
    if (has_zero_col != nullptr) *has_zero_col = (c.array() == 0.0).any();
  }
  return A;
}

double fit_loglog_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  detail::require(x.size() == y.size(), "fit_loglog_slope: length mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long k = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0) continue;
    const double lx = std::log10(x[i]);
    const double ly = std::log10(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++k;
  }
  detail::check(k >= 2, "fit_loglog_slope: need at least two positive points");
  const double denom = k * sxx - sx * sx;
  detail::check(std::abs(denom) > 0.0, "fit_loglog_slope: degenerate x range");
  return (k * sxy - sx * sy) / denom;
}

void run_equilibration_experiment(const ExperimentConfig& config,
                                  std::ostream& out) {
  const ExplicitMatrix A = instance_matrix(config);
  const EquilibrationParams params = equil_params_for(config);

  // Second-order reference optimum when the instance is small enough.
  bool have_p_star = A.rows() + A.cols() <= 4000;
  double p_star = 0.0;
  if (have_p_star) {
    const NewtonResult ref = newton_oracle(A, params, 1e-9);
    detail::check(ref.converged, "equilibration experiment: reference solve failed");
    p_star = ref.p_star;
  }

  DiagnosticsConfig diag;
  diag.matrix = &A;
  diag.stride = config.stride;
  const bool square = A.rows() == A.cols() && A.rows() <= 4000;
  if (square) {
    diag.cond_stride =
        config.cond_stride > 0
            ? config.cond_stride
            : std::max(config.stride,
                       (params.iterations / 20 / std::max(config.stride, 1)) *
                           std::max(config.stride, 1));
  }

  const ScalingResult res = sgd_equilibrate(A, params, diag);
  detail::check(res.box_feasible && res.iterate_bound_ok,
                "equilibration experiment: iterate invariants violated");

  // Gaps are scaled by the starting value f(0,0) = half the squared
  // Frobenius norm, matching how the figures are normalized.
  const double f_zero = std::max(0.5 * A.frobenius_sq(), 1e-300);
  std::vector<double> gap_x, gap_y;
  for (const IterationRecord& rec : res.history) {
    if (have_p_star && rec.objective && rec.iter > 0) {
      gap_x.push_back(rec.iter);
      gap_y.push_back((*rec.objective - p_star) / f_zero);
    }
  }

  config_comment(config, A, out);
  if (have_p_star) {
    out << "# p_star=" << fmt(p_star);
    // The slope only exists when at least two gaps are strictly positive;
    // an already-optimal instance has nothing to fit.
    int usable = 0;
    for (std::size_t k = 0; k < gap_x.size(); ++k) {
      if (gap_x[k] > 0.0 && gap_y[k] > 0.0) ++usable;
    }
    if (usable >= 2) {
      out << " loglog_slope=" << fmt(fit_loglog_slope(gap_x, gap_y));
    }
    out << "\n";
  }
  out << "iter,rel_gap,rms_error,cond_number\n";
  for (const IterationRecord& rec : res.history) {
    out << rec.iter << ",";
    if (have_p_star && rec.objective) {
      out << fmt((*rec.objective - p_star) / f_zero);
    }
    out << ",";
    if (rec.rms) out << fmt(*rec.rms);
    out << ",";
    if (rec.cond) out << fmt(*rec.cond);
    out << "\n";
  }

  if (!config.plot_path.empty()) {
    std::vector<PlotSeries> series;
    if (!gap_x.empty()) {
      series.push_back({"relative gap", gap_x, gap_y, "#1f77b4"});
    }
    std::vector<double> rms_x, rms_y;
    for (const IterationRecord& rec : res.history) {
      if (rec.rms && rec.iter > 0) {
        rms_x.push_back(rec.iter);
        rms_y.push_back(*rec.rms);
      }
    }
    if (!rms_x.empty()) {
      series.push_back({"rms error", rms_x, rms_y, "#d62728"});
    }
    write_svg_loglog(config.plot_path, "stochastic equilibration", "iteration",
                     "value", series);
  }
}

void run_lsqr_experiment(const ExperimentConfig& config, std::ostream& out) {
  const ExplicitMatrix A = instance_matrix(config);

  SeededRng x_rng(config.seed, streams::kSolution);
  Vec x_true(A.cols());
  for (Index j = 0; j < A.cols(); ++j) x_true[j] = x_rng.normal();
  const Vec b = A.apply(x_true);

  config_comment(config, A, out);
  out << "variant,total_iter,rel_residual\n";

  std::vector<PlotSeries> series;
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                           "#9467bd", "#ff7f0e", "#8c564b"};
  int color_idx = 0;

  for (int budget : config.equil_budgets) {
    LsqrRun run;
    std::string variant;
    if (budget == 0) {
      variant = "plain";
      run = lsqr(A, b, config.solver_iters, config.lsqr_tol);
    } else {
      variant = "equil" + std::to_string(budget);
      EquilibrationParams p = equil_params_for(config);
      p.iterations = budget;
      run = lsqr_preconditioned(A, b, p, config.solver_iters, config.lsqr_tol);
    }
    PlotSeries s;
    s.label = variant;
    s.color = palette[color_idx++ % 6];
    for (std::size_t k = 0; k < run.residual_history.size(); ++k) {
      out << variant << "," << k << "," << fmt(run.residual_history[k])
          << "\n";
      if (k > 0) {
        s.x.push_back(static_cast<double>(k));
        s.y.push_back(run.residual_history[k]);
      }
    }
    series.push_back(std::move(s));
  }

  if (!config.plot_path.empty()) {
    write_svg_loglog(config.plot_path, "least squares",
                     "total iteration (incl. equilibration)",
                     "relative residual", series);
  }
}

void run_ccp_experiment(const ExperimentConfig& config, std::ostream& out) {
  const ExplicitMatrix A = instance_matrix(config);
  const Index n = A.cols();

  // Sparse planted solution, dense noise.
  SeededRng support_rng(config.seed, streams::kSparsity);
  SeededRng val_rng(config.seed, streams::kSolution);
  SeededRng noise_rng(config.seed, streams::kNoise);
  const long long nnz_x = std::max<long long>(1, n / 10);
  const std::vector<long long> support =
      sample_distinct_cells(n, nnz_x, support_rng);
  Vec x_hat = Vec::Zero(n);
  for (long long j : support) x_hat[static_cast<Index>(j)] = val_rng.normal();
  Vec b = A.apply(x_hat);
  for (Index i = 0; i < b.size(); ++i) b[i] += noise_rng.normal();

  const double lambda = 1e-3 * A.apply_adjoint(b).lpNorm<Eigen::Infinity>();
  const LassoProblem prob{&A, b, lambda};

  const FistaResult ref = lasso_fista(prob, 1e-10);
  detail::check(ref.converged, "ccp experiment: reference solve failed");

  config_comment(config, A, out);
  out << "# lambda=" << fmt(lambda) << " p_star=" << fmt(ref.p_star) << "\n";
  out << "variant,total_iter,rel_gap\n";

  std::vector<PlotSeries> series;
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                           "#9467bd", "#ff7f0e", "#8c564b"};
  int color_idx = 0;

  for (int budget : config.equil_budgets) {
    CcpOptions opts;
    opts.max_iters = config.solver_iters;
    opts.p_star = ref.p_star;
    opts.gap_tol = config.ccp_gap_tol;
    CcpRun run;
    std::string variant;
    if (budget == 0) {
      variant = "plain";
      run = ccp_lasso(prob, opts);
    } else {
      variant = "equil" + std::to_string(budget);
      EquilibrationParams p = equil_params_for(config);
      p.iterations = budget;
      run = ccp_lasso_preconditioned(prob, p, opts);
    }
    PlotSeries s;
    s.label = variant;
    s.color = palette[color_idx++ % 6];
    for (std::size_t k = 0; k < run.gap_history.size(); ++k) {
      out << variant << "," << k << "," << fmt(run.gap_history[k]) << "\n";
      if (k > 0) {
        s.x.push_back(static_cast<double>(k));
        s.y.push_back(run.gap_history[k]);
      }
    }
    series.push_back(std::move(s));
  }

  if (!config.plot_path.empty()) {
    write_svg_loglog(config.plot_path, "lasso",
                     "total iteration (incl. equilibration)",
                     "relative optimality gap", series);
  }
}

void write_svg_loglog(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<PlotSeries>& series) {
  const double width = 860, height = 540;
  const double left = 70, right = 190, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double lx_min = 1e300, lx_max = -1e300, ly_min = 1e300, ly_max = -1e300;
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (s.x[i] <= 0.0 || s.y[i] <= 0.0) continue;
      lx_min = std::min(lx_min, std::log10(s.x[i]));
      lx_max = std::max(lx_max, std::log10(s.x[i]));
      ly_min = std::min(ly_min, std::log10(s.y[i]));
      ly_max = std::max(ly_max, std::log10(s.y[i]));
    }
  }
  if (lx_min > lx_max) {  // nothing plottable
    lx_min = 0;
    lx_max = 1;
    ly_min = 0;
    ly_max = 1;
  }
  if (lx_max - lx_min < 1e-12) lx_max = lx_min + 1;
  if (ly_max - ly_min < 1e-12) ly_max = ly_min + 1;

  const auto px = [&](double lx) {
    return left + (lx - lx_min) / (lx_max - lx_min) * plot_w;
  };
  const auto py = [&](double ly) {
    return top + (ly_max - ly) / (ly_max - ly_min) * plot_h;
  };

  std::ofstream svg(path);
  detail::check(svg.good(), "write_svg_loglog: cannot open '" + path + "'");
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "' viewBox='0 0 " << width << " " << height
      << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << (left + plot_w / 2) << "' y='22' text-anchor='middle' "
      << "font-family='sans-serif' font-size='16'>" << title << "</text>\n";

  // Decade grid.
  svg << "<g stroke='#dddddd' stroke-width='1'>\n";
  for (int d = static_cast<int>(std::ceil(lx_min));
       d <= static_cast<int>(std::floor(lx_max)); ++d) {
    svg << "<line x1='" << px(d) << "' y1='" << top << "' x2='" << px(d)
        << "' y2='" << (top + plot_h) << "'/>\n";
  }
  for (int d = static_cast<int>(std::ceil(ly_min));
       d <= static_cast<int>(std::floor(ly_max)); ++d) {
    svg << "<line x1='" << left << "' y1='" << py(d) << "' x2='"
        << (left + plot_w) << "' y2='" << py(d) << "'/>\n";
  }
  svg << "</g>\n";

  svg << "<g font-family='sans-serif' font-size='11' fill='#333333'>\n";
  for (int d = static_cast<int>(std::ceil(lx_min));
       d <= static_cast<int>(std::floor(lx_max)); ++d) {
    svg << "<text x='" << px(d) << "' y='" << (top + plot_h + 16)
        << "' text-anchor='middle'>1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(ly_min));
       d <= static_cast<int>(std::floor(ly_max)); ++d) {
    svg << "<text x='" << (left - 8) << "' y='" << (py(d) + 4)
        << "' text-anchor='end'>1e" << d << "</text>\n";
  }
  svg << "</g>\n";

  svg << "<rect x='" << left << "' y='" << top << "' width='" << plot_w
      << "' height='" << plot_h << "' fill='none' stroke='#333333'/>\n";
  svg << "<text x='" << (left + plot_w / 2) << "' y='" << (height - 12)
      << "' text-anchor='middle' font-family='sans-serif' font-size='13'>"
      << xlabel << "</text>\n";
  svg << "<text x='18' y='" << (top + plot_h / 2)
      << "' text-anchor='middle' font-family='sans-serif' font-size='13' "
      << "transform='rotate(-90 18 " << (top + plot_h / 2) << ")'>" << ylabel
      << "</text>\n";

  double legend_y = top + 10;
  for (const PlotSeries& s : series) {
    svg << "<polyline fill='none' stroke='" << s.color
        << "' stroke-width='1.6' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (s.x[i] <= 0.0 || s.y[i] <= 0.0) continue;
      svg << px(std::log10(s.x[i])) << "," << py(std::log10(s.y[i])) << " ";
    }
    svg << "'/>\n";
    svg << "<line x1='" << (left + plot_w + 12) << "' y1='" << legend_y
        << "' x2='" << (left + plot_w + 34) << "' y2='" << legend_y
        << "' stroke='" << s.color << "' stroke-width='2'/>\n";
    svg << "<text x='" << (left + plot_w + 40) << "' y='" << (legend_y + 4)
        << "' font-family='sans-serif' font-size='12'>" << s.label
        << "</text>\n";
    legend_y += 18;
  }
  svg << "</svg>\n";
  detail::check(svg.good(), "write_svg_loglog: write failed");
}

}  // namespace equil
