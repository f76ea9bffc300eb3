#pragma once

// Synthetic sampling-rate sweeps: generate a sparse-CP ground truth, observe it
// through Bernoulli masks with Gaussian noise, solve, and fit the log-log slope
// of per-entry squared error against the sampling rate.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sparsecp/admm.hpp"
#include "sparsecp/kv_config.hpp"
#include "sparsecp/tensor.hpp"

namespace sparsecp {

enum class LambdaPolicy { Fixed, Theory, Grid };

LambdaPolicy parse_lambda_policy(const std::string& name);
std::string to_string(LambdaPolicy p);

/// n log-spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int n);

/// Eight log-spaced rates in [0.1, 0.9].
std::vector<double> default_gamma_grid();

struct ExperimentConfig {
  Dims dims{30, 30, 50};
  int rank = 5;
  double sparsity_fraction = 0.2;
  double a_star_max = 1.0;
  double b_star_max = 1.0;
  double c_star_max = 10.0;
  double sigma = 0.25;
  std::vector<double> gamma_grid = default_gamma_grid();
  int trials = 10;
  /// Template for every solve; rank, bounds and seed are filled in per trial.
  SolverConfig solver;
  LambdaPolicy lambda_policy = LambdaPolicy::Grid;
  double lambda_fixed = 0.0;
  std::vector<double> lambda_grid{0.0, 1.0, 4.0};
  /// Slope is fitted on the upper `fit_fraction` of the sorted grid.
  double fit_fraction = 0.5;
  std::uint64_t master_seed = 1;

  void validate() const;

  /// Keys: n1 n2 n3 F sparsity a_star_max b_star_max c_star_max sigma gammas
  /// (or gamma_min gamma_max gamma_count) trials lambda_policy lambda
  /// lambda_grid fit_fraction master_seed, plus solver keys rho0 eta
  /// delta1_stop delta2_stop t_max inner_iters inner_tol.
  static ExperimentConfig from_kv(const KeyValueConfig& kv);
};

/// round(fraction * n3 * F), at least 1 when fraction > 0.
std::int64_t sparse_count(double fraction, Index n3, Index rank);

struct SyntheticProblem {
  Tensor3d truth;
  CPFactorsd factors;
  std::int64_t c_nnz = 0;
};

/// N(0,1) factors clamped to the true bounds; C keeps exactly sparse_count(...)
/// entries chosen uniformly without replacement.
SyntheticProblem generate_synthetic(const ExperimentConfig& config, std::uint64_t seed);

/// A_max = 2 A*_max, B_max = 2 B*_max, C_max = 2 C*_max, X_max = 2 ||X*||_inf.
Bounds solver_bounds(const ExperimentConfig& config, const Tensor3d& truth);

struct TrialOutcome {
  double error = 0.0;  ///< ||X_hat - X*||_F^2 / (n1 n2 n3)
  int iterations = 0;
  bool converged = false;
  bool failed = false;  ///< numerical failure; error is not meaningful
};

/// One (gamma, trial) cell of a sweep with fully derived seeds.
TrialOutcome run_trial(const ExperimentConfig& config, const SyntheticProblem& problem, std::size_t gamma_index,
                       int trial, double lambda_reg);

struct SweepRow {
  double gamma = 0.0;
  double mean_error = 0.0;
  double std_error = 0.0;
  int trials_used = 0;
  int nonconverged = 0;
  bool flagged = false;  ///< more than half of the trials hit t_max or failed
  double bound_rhs = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double fitted_slope = 0.0;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  double lambda_used = 0.0;
  /// (lambda, sum of log10 errors) for every candidate the policy evaluated.
  std::vector<std::pair<double, double>> lambda_scores;
  Dims dims{1, 1, 1};
  int rank = 1;
  std::int64_t c_nnz = 0;
  double sigma = 0.0;
  double x_max = 0.0;
};

SweepResult run_sweep(const ExperimentConfig& config, int parallel = 1);

/// OLS slope of y on x; needs at least two distinct x.
double fit_slope(const std::vector<std::pair<double, double>>& points);

void write_csv(std::ostream& os, const SweepResult& result);
void emit_csv(const SweepResult& result, const std::string& path);
/// Parses the CSV columns back into rows (bound and convergence fields are not in the CSV).
std::vector<SweepRow> read_csv(std::istream& is);

void write_report(std::ostream& os, const SweepResult& result);
void emit_report(const SweepResult& result, const std::string& path);

}  // namespace sparsecp
