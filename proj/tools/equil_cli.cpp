// Command-line front end: generate test instances, equilibrate them, report
// conditioning metrics, and run the least-squares / lasso benchmarks.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

#include "equil/equilibrate.hpp"
#include "equil/exact_solvers.hpp"
#include "equil/experiments.hpp"
#include "equil/matrix_market.hpp"
#include "equil/metrics.hpp"

namespace {

struct CliOptions {
  equil::ExperimentConfig config;
  std::string alpha = "auto";
  std::string beta = "auto";
};

double parse_target(const std::string& text, const char* name) {
  if (text == "auto") return equil::EquilibrationParams::kAutoTarget;
  try {
    const double v = std::stod(text);
    if (v <= 0.0) throw std::invalid_argument("nonpositive");
    return v;
  } catch (const std::exception&) {
    throw CLI::ValidationError(std::string(name) +
                               ": expected 'auto' or a positive number");
  }
}

void add_matrix_options(CLI::App* cmd, CliOptions& opts, bool with_gen) {
  if (with_gen) {
    cmd->add_option("--rows", opts.config.rows, "generated instance rows")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--cols", opts.config.cols, "generated instance columns")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--density", opts.config.density,
                    "generated fill fraction in (0, 1]");
    cmd->add_option("--seed", opts.config.seed, "master seed");
  }
  cmd->add_option("--matrix", opts.config.matrix_path,
                  "Matrix Market file to load instead of generating");
  cmd->set_config("--config", "", "read options from a key=value file");
}

void add_equil_options(CLI::App* cmd, CliOptions& opts) {
  cmd->add_option("--alpha", opts.alpha, "row norm target or 'auto'");
  cmd->add_option("--beta", opts.beta, "column norm target or 'auto'");
  cmd->add_option("--gamma", opts.config.equil.gamma,
                  "regularization weight");
  cmd->add_option("--max-scale-log", opts.config.equil.max_log_scale,
                  "half-width of the log-scale box");
  cmd->add_option("--iters", opts.config.equil.iterations,
                  "stochastic iteration budget");
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file.good()) {
    throw CLI::ValidationError("cannot open output file '" + path + "'");
  }
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic matrix-free equilibration toolkit"};
  app.require_subcommand(1);

  CliOptions opts;
  opts.config.rows = 1000;
  opts.config.cols = 1000;

  auto* gen = app.add_subcommand("gen", "generate a test instance");
  add_matrix_options(gen, opts, true);
  gen->add_option("--out", opts.config.out_path, "output Matrix Market path")
      ->required();

  auto* equilibrate =
      app.add_subcommand("equilibrate", "run stochastic equilibration");
  add_matrix_options(equilibrate, opts, true);
  add_equil_options(equilibrate, opts);
  equilibrate->add_option("--stride", opts.config.stride,
                          "diagnostics every this many iterations")
      ->check(CLI::PositiveNumber);
  equilibrate->add_option("--out", opts.config.out_path, "CSV output path");
  equilibrate->add_option("--plot", opts.config.plot_path, "SVG plot path");

  auto* metrics = app.add_subcommand("metrics", "conditioning report");
  add_matrix_options(metrics, opts, true);
  add_equil_options(metrics, opts);

  auto* bench_lsqr =
      app.add_subcommand("bench-lsqr", "least-squares preconditioning benchmark");
  add_matrix_options(bench_lsqr, opts, true);
  add_equil_options(bench_lsqr, opts);
  bench_lsqr->add_option("--equil-budgets", opts.config.equil_budgets,
                         "comma-separated equilibration budgets (0 = plain)")
      ->delimiter(',');
  bench_lsqr->add_option("--solver-iters", opts.config.solver_iters,
                         "iteration cap per run");
  bench_lsqr->add_option("--tol", opts.config.lsqr_tol,
                         "relative residual target");
  bench_lsqr->add_option("--out", opts.config.out_path, "CSV output path");
  bench_lsqr->add_option("--plot", opts.config.plot_path, "SVG plot path");

  auto* bench_ccp = app.add_subcommand("bench-ccp", "lasso preconditioning benchmark");
  add_matrix_options(bench_ccp, opts, true);
  add_equil_options(bench_ccp, opts);
  bench_ccp->add_option("--equil-budgets", opts.config.equil_budgets,
                        "comma-separated equilibration budgets (0 = plain)")
      ->delimiter(',');
  bench_ccp->add_option("--solver-iters", opts.config.solver_iters,
                        "iteration cap per run");
  bench_ccp->add_option("--tol", opts.config.ccp_gap_tol,
                        "relative gap target");
  bench_ccp->add_option("--out", opts.config.out_path, "CSV output path");
  bench_ccp->add_option("--plot", opts.config.plot_path, "SVG plot path");

  CLI11_PARSE(app, argc, argv);

  try {
    opts.config.equil.alpha = parse_target(opts.alpha, "--alpha");
    opts.config.equil.beta = parse_target(opts.beta, "--beta");
    opts.config.equil.seed = opts.config.seed;

    if (gen->parsed()) {
      bool zero_row = false, zero_col = false;
      const equil::ExplicitMatrix A =
          equil::gen_matrix(opts.config.rows, opts.config.cols,
                            opts.config.density, opts.config.seed, &zero_row,
                            &zero_col);
      equil::write_matrix_market_file(opts.config.out_path, A);
      std::cout << "wrote " << A.rows() << "x" << A.cols() << " with "
                << A.stored_entries() << " entries to "
                << opts.config.out_path << "\n";
      if (zero_row) std::cerr << "warning: instance has an empty row\n";
      if (zero_col) std::cerr << "warning: instance has an empty column\n";
    } else if (equilibrate->parsed()) {
      std::ofstream file;
      equil::run_equilibration_experiment(opts.config,
                                          open_out(opts.config.out_path, file));
    } else if (metrics->parsed()) {
      const equil::ExplicitMatrix A =
          opts.config.matrix_path.empty()
              ? equil::gen_matrix(opts.config.rows, opts.config.cols,
                                  opts.config.density, opts.config.seed)
              : equil::read_matrix_market_file(opts.config.matrix_path);
      const auto [alpha, beta] =
          equil::resolve_targets(opts.config.equil, A.rows(), A.cols());
      std::cout << "rows " << A.rows() << ", cols " << A.cols()
                << ", stored entries " << A.stored_entries() << "\n";
      std::cout << "rms_error (unscaled)   "
                << equil::rms_error(A, equil::Vec::Zero(A.rows()),
                                    equil::Vec::Zero(A.cols()), alpha, beta)
                << "\n";
      std::cout << "convergence_bound      "
                << equil::convergence_constant_bound(A, opts.config.equil)
                << "\n";
      if (A.rows() == A.cols() && A.rows() <= 4000) {
        std::cout << "condition_number       " << equil::condition_number(A)
                  << "\n";
        std::cout << "log_phi                " << equil::log_phi(A) << "\n";
        const auto bounds = equil::kappa_bounds(A);
        std::cout << "kappa_bounds           [" << bounds.first << ", "
                  << bounds.second << "]\n";
      }
    } else if (bench_lsqr->parsed()) {
      std::ofstream file;
      equil::run_lsqr_experiment(opts.config,
                                 open_out(opts.config.out_path, file));
    } else if (bench_ccp->parsed()) {
      std::ofstream file;
      equil::run_ccp_experiment(opts.config,
                                open_out(opts.config.out_path, file));
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
