#include "sparsecp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "sparsecp/rng.hpp"
#include "sparsecp/sampling.hpp"
#include "sparsecp/theory.hpp"

namespace sparsecp {

LambdaPolicy parse_lambda_policy(const std::string& name) {
  if (name == "fixed") return LambdaPolicy::Fixed;
  if (name == "theory") return LambdaPolicy::Theory;
  if (name == "grid") return LambdaPolicy::Grid;
  throw ConfigError("unknown lambda policy '" + name + "' (expected fixed, theory or grid)");
}

std::string to_string(LambdaPolicy p) {
  switch (p) {
    case LambdaPolicy::Fixed:
      return "fixed";
    case LambdaPolicy::Theory:
      return "theory";
    case LambdaPolicy::Grid:
      return "grid";
  }
  return "?";
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw ConfigError("log_spaced: need n >= 1 and 0 < lo <= hi");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> default_gamma_grid() { return log_spaced(0.1, 0.9, 8); }

void ExperimentConfig::validate() const {
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) throw ConfigError("experiment dims must be positive");
  if (rank <= 0) throw ConfigError("experiment rank F must be positive");
  if (!(sparsity_fraction > 0.0 && sparsity_fraction <= 1.0)) throw ConfigError("sparsity must lie in (0, 1]");
  if (!(a_star_max > 0.0 && b_star_max > 0.0 && c_star_max > 0.0)) throw ConfigError("true bounds must be positive");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (gamma_grid.empty()) throw ConfigError("gamma grid is empty");
  for (double g : gamma_grid)
    if (!(g > 0.0 && g <= 1.0)) throw ConfigError("gamma grid values must lie in (0, 1]");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (!(fit_fraction > 0.0 && fit_fraction <= 1.0)) throw ConfigError("fit_fraction must lie in (0, 1]");
  if (lambda_policy == LambdaPolicy::Grid && lambda_grid.empty()) throw ConfigError("lambda grid is empty");
  for (double l : lambda_grid)
    if (!(l >= 0.0)) throw ConfigError("lambda grid values must be nonnegative");
  if (!(lambda_fixed >= 0.0)) throw ConfigError("lambda must be nonnegative");
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.dims = {kv.get_int("n1", c.dims[0]), kv.get_int("n2", c.dims[1]), kv.get_int("n3", c.dims[2])};
  c.rank = static_cast<int>(kv.get_int("F", c.rank));
  c.sparsity_fraction = kv.get_double("sparsity", c.sparsity_fraction);
  c.a_star_max = kv.get_double("a_star_max", c.a_star_max);
  c.b_star_max = kv.get_double("b_star_max", c.b_star_max);
  c.c_star_max = kv.get_double("c_star_max", c.c_star_max);
  c.sigma = kv.get_double("sigma", c.sigma);
  if (kv.has("gammas")) {
    c.gamma_grid = kv.get_doubles("gammas", {});
  } else if (kv.has("gamma_min") || kv.has("gamma_max") || kv.has("gamma_count")) {
    c.gamma_grid = log_spaced(kv.get_double("gamma_min", 0.1), kv.get_double("gamma_max", 0.9),
                              static_cast<int>(kv.get_int("gamma_count", 8)));
  }
  c.trials = static_cast<int>(kv.get_int("trials", c.trials));
  c.lambda_policy = parse_lambda_policy(kv.get_string("lambda_policy", to_string(c.lambda_policy)));
  c.lambda_fixed = kv.get_double("lambda", c.lambda_fixed);
  c.lambda_grid = kv.get_doubles("lambda_grid", c.lambda_grid);
  c.fit_fraction = kv.get_double("fit_fraction", c.fit_fraction);
  c.master_seed = static_cast<std::uint64_t>(kv.get_int("master_seed", static_cast<std::int64_t>(c.master_seed)));

  auto& s = c.solver;
  s.rho0 = kv.get_double("rho0", s.rho0);
  s.eta = kv.get_double("eta", s.eta);
  s.delta1_stop = kv.get_double("delta1_stop", s.delta1_stop);
  s.delta2_stop = kv.get_double("delta2_stop", s.delta2_stop);
  s.t_max = static_cast<int>(kv.get_int("t_max", s.t_max));
  s.inner_iters = static_cast<int>(kv.get_int("inner_iters", s.inner_iters));
  s.inner_tol = kv.get_double("inner_tol", s.inner_tol);

  if (const auto extra = kv.unused_keys(); !extra.empty()) {
    throw ConfigError(kv.source() + ": unknown key '" + extra.front() + "'");
  }
  c.validate();
  return c;
}

std::int64_t sparse_count(double fraction, Index n3, Index rank) {
  const auto total = static_cast<std::int64_t>(n3 * rank);
  const auto k = static_cast<std::int64_t>(std::llround(fraction * static_cast<double>(total)));
  return std::clamp<std::int64_t>(k, fraction > 0.0 ? 1 : 0, total);
}

SyntheticProblem generate_synthetic(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const auto& d = config.dims;
  const Index f = config.rank;
  auto gaussian = [&rng](Index rows, Index cols, double bound) {
    MatrixXd m(rows, cols);
    for (Index e = 0; e < m.size(); ++e) m(e) = std::clamp(rng.normal(), -bound, bound);
    return m;
  };
  MatrixXd a = gaussian(d[0], f, config.a_star_max);
  MatrixXd b = gaussian(d[1], f, config.b_star_max);
  MatrixXd c = gaussian(d[2], f, config.c_star_max);

  // Partial Fisher-Yates: the first k slots of `order` are a uniform k-subset.
  const std::int64_t k = sparse_count(config.sparsity_fraction, d[2], f);
  std::vector<Index> order(static_cast<std::size_t>(c.size()));
  std::iota(order.begin(), order.end(), Index{0});
  for (std::int64_t s = 0; s < k; ++s) {
    const auto pick = s + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(c.size() - s)));
    std::swap(order[s], order[pick]);
  }
  MatrixXd sparse = MatrixXd::Zero(c.rows(), c.cols());
  for (std::int64_t s = 0; s < k; ++s) sparse(order[s]) = c(order[s]);

  SyntheticProblem p;
  p.factors = CPFactorsd(std::move(a), std::move(b), std::move(sparse));
  p.truth = cp_reconstruct(p.factors);
  p.c_nnz = nnz(p.factors.c);
  return p;
}

Bounds solver_bounds(const ExperimentConfig& config, const Tensor3d& truth) {
  return {2.0 * config.a_star_max, 2.0 * config.b_star_max, 2.0 * config.c_star_max, 2.0 * max_abs(truth)};
}

TrialOutcome run_trial(const ExperimentConfig& config, const SyntheticProblem& problem, std::size_t gamma_index,
                       int trial, double lambda_reg) {
  const std::uint64_t gi = gamma_index, tr = static_cast<std::uint64_t>(trial);
  const auto mask = sample_bernoulli_mask(config.dims, config.gamma_grid.at(gamma_index),
                                          derive_seed(config.master_seed, Stream::Mask, {gi, tr}));
  const auto obs =
      observe_gaussian(problem.truth, mask, config.sigma, derive_seed(config.master_seed, Stream::Noise, {gi, tr}));

  SolverConfig sc = config.solver;
  sc.rank = config.rank;
  sc.bounds = solver_bounds(config, problem.truth);
  sc.lambda_reg = lambda_reg;
  sc.seed = derive_seed(config.master_seed, Stream::Init, {gi, tr});
  sc.track_descent = false;

  TrialOutcome out;
  try {
    const SolveResult r = solve(obs, sc);
    out.error = (r.x_hat - problem.truth).squared_norm() / static_cast<double>(dims_product(config.dims));
    out.iterations = r.iterations;
    out.converged = r.converged;
  } catch (const NumericalError&) {
    out.failed = true;
  }
  return out;
}

double fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw ConfigError("fit_slope: need at least two points");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("fit_slope: need at least two distinct abscissae");
  return sxy / sxx;
}

namespace {

std::vector<TrialOutcome> run_all_trials(const ExperimentConfig& config, const SyntheticProblem& problem,
                                         double lambda_reg, int parallel) {
  const std::size_t per_gamma = static_cast<std::size_t>(config.trials);
  const std::size_t total = config.gamma_grid.size() * per_gamma;
  std::vector<TrialOutcome> outcomes(total);
  auto work = [&](std::size_t task) {
    outcomes[task] = run_trial(config, problem, task / per_gamma, static_cast<int>(task % per_gamma), lambda_reg);
  };
  const int workers = std::clamp(parallel, 1, static_cast<int>(std::max<std::size_t>(total, 1)));
  if (workers == 1) {
    for (std::size_t task = 0; task < total; ++task) work(task);
    return outcomes;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t task = next++; task < total; task = next++) work(task);
    });
  }
  for (auto& th : pool) th.join();
  return outcomes;
}

std::vector<SweepRow> aggregate(const ExperimentConfig& config, const std::vector<TrialOutcome>& outcomes) {
  const std::size_t per_gamma = static_cast<std::size_t>(config.trials);
  std::vector<SweepRow> rows;
  for (std::size_t g = 0; g < config.gamma_grid.size(); ++g) {
    SweepRow row;
    row.gamma = config.gamma_grid[g];
    std::vector<double> errs;
    int bad = 0;
    for (std::size_t t = 0; t < per_gamma; ++t) {
      const auto& o = outcomes[g * per_gamma + t];
      if (o.failed) {
        ++bad;
        continue;
      }
      if (!o.converged) {
        ++bad;
        ++row.nonconverged;
      }
      errs.push_back(o.error);
    }
    row.trials_used = static_cast<int>(errs.size());
    if (!errs.empty()) {
      const double n = static_cast<double>(errs.size());
      row.mean_error = std::accumulate(errs.begin(), errs.end(), 0.0) / n;
      if (errs.size() > 1) {
        double ss = 0.0;
        for (double e : errs) ss += (e - row.mean_error) * (e - row.mean_error);
        row.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
      }
    } else {
      row.mean_error = std::numeric_limits<double>::quiet_NaN();
    }
    row.flagged = 2 * bad > config.trials;
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.gamma < b.gamma; });
  return rows;
}

double log_error_score(const std::vector<SweepRow>& rows) {
  double s = 0.0;
  for (const auto& r : rows) s += r.mean_error > 0.0 ? std::log10(r.mean_error) : std::numeric_limits<double>::infinity();
  return std::isnan(s) ? std::numeric_limits<double>::infinity() : s;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config, int parallel) {
  config.validate();
  const SyntheticProblem problem = generate_synthetic(config, derive_seed(config.master_seed, Stream::Truth));
  const Bounds bounds = solver_bounds(config, problem.truth);
  const theory::ProblemSize size{config.dims[0], config.dims[1], config.dims[2], config.rank};
  const double beta = theory::compute_beta(config.rank, bounds.a_max, bounds.b_max, bounds.c_max, bounds.x_max,
                                           std::max<std::int64_t>(size.n_max(), 2));

  std::vector<double> candidates;
  switch (config.lambda_policy) {
    case LambdaPolicy::Fixed:
      candidates = {config.lambda_fixed};
      break;
    case LambdaPolicy::Theory:
      candidates = {theory::compute_lambda(beta, theory::compute_qd_gaussian(bounds.x_max, config.sigma),
                                           std::max<std::int64_t>(size.n_max(), 2))};
      break;
    case LambdaPolicy::Grid:
      candidates = config.lambda_grid;
      break;
  }

  SweepResult best;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> scores;
  for (double lambda_reg : candidates) {
    auto rows = aggregate(config, run_all_trials(config, problem, lambda_reg, parallel));
    const double score = log_error_score(rows);
    scores.emplace_back(lambda_reg, score);
    if (best.rows.empty() || score < best_score) {
      best_score = score;
      best.rows = std::move(rows);
      best.lambda_used = lambda_reg;
    }
  }
  best.lambda_scores = std::move(scores);
  best.dims = config.dims;
  best.rank = config.rank;
  best.c_nnz = problem.c_nnz;
  best.sigma = config.sigma;
  best.x_max = bounds.x_max;

  const double total = static_cast<double>(dims_product(config.dims));
  for (auto& row : best.rows) {
    const double m = std::clamp(row.gamma * total, 1.0, total);
    row.bound_rhs = theory::error_bound_rhs(size, problem.c_nnz, m, config.sigma, bounds.x_max, beta);
  }

  const std::size_t n = best.rows.size();
  const std::size_t keep = std::max<std::size_t>(
      std::min<std::size_t>(n, 2), static_cast<std::size_t>(std::ceil(config.fit_fraction * static_cast<double>(n))));
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = n - std::min(keep, n); i < n; ++i) {
    const auto& r = best.rows[i];
    if (r.mean_error > 0.0) pts.emplace_back(std::log10(r.gamma), std::log10(r.mean_error));
  }
  if (n > 0) {
    best.fit_lo = best.rows[n - std::min(keep, n)].gamma;
    best.fit_hi = best.rows[n - 1].gamma;
  }
  best.fitted_slope = pts.size() >= 2 && pts.front().first != pts.back().first
                          ? fit_slope(pts)
                          : std::numeric_limits<double>::quiet_NaN();
  return best;
}

void write_csv(std::ostream& os, const SweepResult& result) {
  os << "gamma,log10_gamma,mean_err,log10_mean_err,stderr,trials\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : result.rows) {
    os << r.gamma << ',' << std::log10(r.gamma) << ',' << r.mean_error << ',' << std::log10(r.mean_error) << ','
       << r.std_error << ',' << r.trials_used << '\n';
  }
}

void emit_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, result);
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<SweepRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "gamma,log10_gamma,mean_err,log10_mean_err,stderr,trials") {
    throw IoError("sweep CSV: unexpected header");
  }
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw IoError("sweep CSV: expected 6 columns in '" + line + "'");
    SweepRow r;
    try {
      r.gamma = std::stod(cells[0]);
      r.mean_error = std::stod(cells[2]);
      r.std_error = std::stod(cells[4]);
      r.trials_used = std::stoi(cells[5]);
    } catch (const std::exception&) {
      throw IoError("sweep CSV: malformed row '" + line + "'");
    }
    rows.push_back(r);
  }
  return rows;
}

void write_report(std::ostream& os, const SweepResult& result) {
  const auto& d = result.dims;
  os << "sampling-rate sweep\n";
  os << "dims = " << d[0] << " x " << d[1] << " x " << d[2] << ", F = " << result.rank << ", nnz(C*) = " << result.c_nnz
     << ", sigma = " << result.sigma << ", X_max = " << result.x_max << '\n';
  os << "lambda = " << result.lambda_used;
  if (result.lambda_scores.size() > 1) {
    os << "  (candidates:";
    for (const auto& [l, s] : result.lambda_scores) os << ' ' << l << " -> " << s;
    os << ")";
  }
  os << '\n';
  os << std::setprecision(6);
  os << "fitted slope = " << result.fitted_slope << "  over gamma in [" << result.fit_lo << ", " << result.fit_hi
     << "]\n\n";
  os << std::left << std::setw(12) << "gamma" << std::setw(16) << "mean_err" << std::setw(14) << "stderr"
     << std::setw(8) << "trials" << std::setw(10) << "t_max_hit" << std::setw(16) << "bound_rhs"
     << "flag\n";
  for (const auto& r : result.rows) {
    os << std::setw(12) << r.gamma << std::setw(16) << r.mean_error << std::setw(14) << r.std_error << std::setw(8)
       << r.trials_used << std::setw(10) << r.nonconverged << std::setw(16) << r.bound_rhs
       << (r.flagged ? "FLAGGED" : "") << '\n';
  }
}

void emit_report(const SweepResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_report(out, result);
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace sparsecp
