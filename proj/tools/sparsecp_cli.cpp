// sparsecp: command-line front end.
//
//   sparsecp solve    --obs y.txt --config solver.cfg [--factors out] [--xhat x.txt] [--history h.csv]
//   sparsecp bound    --n1 30 --n2 30 --n3 50 -F 5 --nnz 50 --gamma 0.5 --sigma 0.25 ...
//   sparsecp sweep    --config sweep.cfg [--out results.csv] [--report report.txt] [--parallel N]
//   sparsecp generate --config sweep.cfg --prefix truth [--gamma 0.3] [--obs y.txt]

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <string>

#include "sparsecp/admm.hpp"
#include "sparsecp/errors.hpp"
#include "sparsecp/experiment.hpp"
#include "sparsecp/io.hpp"
#include "sparsecp/kv_config.hpp"
#include "sparsecp/rng.hpp"
#include "sparsecp/sampling.hpp"
#include "sparsecp/theory.hpp"

using namespace sparsecp;

namespace {

SolverConfig solver_from_kv(const KeyValueConfig& kv) {
  SolverConfig s;
  s.lambda_reg = kv.get_double("lambda", s.lambda_reg);
  s.rho0 = kv.get_double("rho0", s.rho0);
  s.eta = kv.get_double("eta", s.eta);
  s.delta1_stop = kv.get_double("delta1_stop", s.delta1_stop);
  s.delta2_stop = kv.get_double("delta2_stop", s.delta2_stop);
  s.t_max = static_cast<int>(kv.get_int("t_max", s.t_max));
  s.rank = static_cast<int>(kv.require_int("F"));
  s.inner_iters = static_cast<int>(kv.get_int("inner_iters", s.inner_iters));
  s.inner_tol = kv.get_double("inner_tol", s.inner_tol);
  s.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  if (kv.has("bounds")) {
    const auto b = kv.get_doubles("bounds", {});
    if (b.size() != 4) throw ConfigError(kv.source() + ": bounds expects a_max,b_max,c_max,x_max");
    s.bounds = {b[0], b[1], b[2], b[3]};
  } else {
    s.bounds = {kv.require_double("a_max"), kv.require_double("b_max"), kv.require_double("c_max"),
                kv.require_double("x_max")};
  }
  if (const auto extra = kv.unused_keys(); !extra.empty()) {
    throw ConfigError(kv.source() + ": unknown key '" + extra.front() + "'");
  }
  s.validate();
  return s;
}

int run_solve(const std::string& obs_path, const std::string& config_path, const std::string& factors_prefix,
              const std::string& xhat_path, const std::string& history_path, bool theory_lambda) {
  const auto obs = io::load_observations(obs_path);
  SolverConfig config = solver_from_kv(KeyValueConfig::load(config_path));
  if (theory_lambda) {
    const auto& d = obs.dims();
    const theory::ProblemSize size{d[0], d[1], d[2], config.rank};
    const auto n_max = std::max<std::int64_t>(size.n_max(), 2);
    const auto& b = config.bounds;
    const double beta = theory::compute_beta(config.rank, b.a_max, b.b_max, b.c_max, b.x_max, n_max);
    config.lambda_reg = theory::compute_lambda(beta, theory::compute_qd_gaussian(b.x_max, obs.sigma), n_max);
  }

  const SolveResult r = solve(obs, config);
  std::cout << std::setprecision(6) << "lambda = " << config.lambda_reg << "\niterations = " << r.iterations
            << "\nconverged = " << (r.converged ? "yes" : "no") << "\nnnz(C) = " << nnz(r.factors.c) << '\n';
  if (!r.history.empty()) {
    const auto& last = r.history.back();
    std::cout << "delta1 = " << last.delta1 << "\ndelta2 = " << last.delta2 << "\nobjective = " << last.objective
              << "\nrho = " << last.rho << '\n';
  }

  if (!factors_prefix.empty()) io::save_factors(factors_prefix, r.factors);
  if (!xhat_path.empty()) io::save_tensor(xhat_path, r.x_hat);
  if (!history_path.empty()) {
    std::ofstream out(history_path);
    if (!out) throw IoError("cannot open '" + history_path + "' for writing");
    out << "t,delta1,delta2,objective,rho\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& h : r.history)
      out << h.t << ',' << h.delta1 << ',' << h.delta2 << ',' << h.objective << ',' << h.rho << '\n';
    if (!out.flush()) throw IoError("write failed for '" + history_path + "'");
  }
  return 0;
}

struct BoundArgs {
  theory::BoundInputs in;
  double gamma = -1.0;
  std::string csv;
};

int run_bound(BoundArgs args) {
  auto& in = args.in;
  const double total = static_cast<double>(in.size.n1 * in.size.n2 * in.size.n3);
  if (args.gamma > 0.0) in.m = args.gamma * total;
  const auto r = theory::evaluate_bounds(in);
  std::cout << std::setprecision(10) << "beta = " << r.beta << "\nL_lev = " << r.l_lev << "\nL_loc = " << r.l_loc
            << "\nQ_D = " << r.q_d << "\nlambda = " << r.lambda << "\nlambda_min = " << r.lambda_min
            << "\npen_bits = " << r.penalty_bits << "\ndof = " << r.dof << "\ndof_matricized = " << r.dof_matricized
            << "\nm = " << r.m << "\nrhs = " << r.rhs
            << "\ncode_length_bound = " << (r.code_length_bound ? "true" : "false")
            << "\nlevels_cover_quantization = " << (r.quantization_predicate ? "true" : "false")
            << "\nlevels_cover_sample_size = " << (r.sample_size_predicate ? "true" : "false") << '\n';
  if (!args.csv.empty()) {
    std::ofstream out(args.csv);
    if (!out) throw IoError("cannot open '" + args.csv + "' for writing");
    out << "n1,n2,n3,F,nnz,m,sigma,a_max,b_max,c_max,x_max,beta,L_lev,L_loc,Q_D,lambda,pen_bits,dof,rhs\n"
        << std::setprecision(std::numeric_limits<double>::max_digits10) << in.size.n1 << ',' << in.size.n2 << ','
        << in.size.n3 << ',' << in.size.rank << ',' << in.c_nnz << ',' << r.m << ',' << in.sigma << ',' << in.a_max
        << ',' << in.b_max << ',' << in.c_max << ',' << in.x_max << ',' << r.beta << ',' << r.l_lev << ','
        << r.l_loc << ',' << r.q_d << ',' << r.lambda << ',' << r.penalty_bits << ',' << r.dof << ',' << r.rhs
        << '\n';
    if (!out.flush()) throw IoError("write failed for '" + args.csv + "'");
  }
  return 0;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_path, const std::string& report_path,
                  int parallel) {
  const auto config = ExperimentConfig::from_kv(KeyValueConfig::load(config_path));
  const auto result = run_sweep(config, parallel);
  if (!out_path.empty()) emit_csv(result, out_path);
  if (!report_path.empty()) emit_report(result, report_path);
  write_report(std::cout, result);
  return 0;
}

int run_generate(const std::string& config_path, const std::string& prefix, double gamma, const std::string& obs_path,
                 std::uint64_t seed_override, bool has_seed) {
  auto config = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::from_kv(KeyValueConfig::load(config_path));
  if (has_seed) config.master_seed = seed_override;
  const auto problem = generate_synthetic(config, derive_seed(config.master_seed, Stream::Truth));
  io::save_tensor(prefix + "_truth.txt", problem.truth);
  io::save_factors(prefix, problem.factors);
  std::cout << "wrote " << prefix << "_truth.txt and " << prefix << "_{A,B,C}.txt (nnz(C) = " << problem.c_nnz
            << ", X_max = " << 2.0 * max_abs(problem.truth) << ")\n";
  if (!obs_path.empty()) {
    const auto mask = sample_bernoulli_mask(config.dims, gamma, derive_seed(config.master_seed, Stream::Mask, {0, 0}));
    const auto obs =
        observe_gaussian(problem.truth, mask, config.sigma, derive_seed(config.master_seed, Stream::Noise, {0, 0}));
    io::save_observations(obs_path, obs);
    std::cout << "wrote " << obs_path << " (" << obs.size() << " samples)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-factor CP tensor completion"};
  app.require_subcommand(1);

  auto* solve_cmd = app.add_subcommand("solve", "Fit [A, B, C] to observed entries");
  std::string obs_path, solve_cfg, factors_prefix, xhat_path, history_path;
  bool theory_lambda = false;
  solve_cmd->add_option("--obs", obs_path, "Observations file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--config", solve_cfg, "Solver key-value config")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--factors", factors_prefix, "Write factors to PREFIX_{A,B,C}.txt");
  solve_cmd->add_option("--xhat", xhat_path, "Write the reconstructed tensor");
  solve_cmd->add_option("--history", history_path, "Per-iteration CSV (t,delta1,delta2,objective,rho)");
  solve_cmd->add_flag("--theory-lambda", theory_lambda, "Replace lambda with the theoretical regularizer");

  auto* bound_cmd = app.add_subcommand("bound", "Print theoretical constants and the error bound");
  BoundArgs bargs;
  auto& bin = bargs.in;
  bound_cmd->add_option("--n1", bin.size.n1)->required();
  bound_cmd->add_option("--n2", bin.size.n2)->required();
  bound_cmd->add_option("--n3", bin.size.n3)->required();
  bound_cmd->add_option("-F,--rank", bin.size.rank)->required();
  bound_cmd->add_option("--nnz", bin.c_nnz, "nnz(C*)")->required();
  auto* m_opt = bound_cmd->add_option("-m,--samples", bin.m, "Expected sample count");
  bound_cmd->add_option("--gamma", bargs.gamma, "Sampling rate; sets m = gamma n1 n2 n3")->excludes(m_opt);
  bound_cmd->add_option("--sigma", bin.sigma)->required();
  bound_cmd->add_option("--a-max", bin.a_max)->required();
  bound_cmd->add_option("--b-max", bin.b_max)->required();
  bound_cmd->add_option("--c-max", bin.c_max)->required();
  bound_cmd->add_option("--x-max", bin.x_max)->required();
  bound_cmd->add_option("--csv", bargs.csv, "Also write one CSV row");

  auto* sweep_cmd = app.add_subcommand("sweep", "Sampling-rate sweep on synthetic data");
  std::string sweep_cfg, sweep_out, sweep_report;
  int parallel = 1;
  sweep_cmd->add_option("--config", sweep_cfg, "Experiment key-value config")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", sweep_out, "Results CSV");
  sweep_cmd->add_option("--report", sweep_report, "Plain-text report");
  sweep_cmd->add_option("--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber);

  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic ground truth (and optionally observations)");
  std::string gen_cfg, prefix = "truth", gen_obs;
  double gen_gamma = 0.5;
  std::uint64_t gen_seed = 0;
  gen_cmd->add_option("--config", gen_cfg, "Experiment key-value config")->check(CLI::ExistingFile);
  gen_cmd->add_option("--prefix", prefix, "Output prefix");
  auto* seed_opt = gen_cmd->add_option("--seed", gen_seed, "Master seed override");
  gen_cmd->add_option("--gamma", gen_gamma, "Sampling rate for --obs")->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--obs", gen_obs, "Write noisy observations");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) return run_solve(obs_path, solve_cfg, factors_prefix, xhat_path, history_path, theory_lambda);
    if (*bound_cmd) return run_bound(bargs);
    if (*sweep_cmd) return run_sweep_cmd(sweep_cfg, sweep_out, sweep_report, parallel);
    if (*gen_cmd) return run_generate(gen_cfg, prefix, gen_gamma, gen_obs, gen_seed, seed_opt->count() > 0);
  } catch (const NumericalError& e) {
    std::cerr << "sparsecp: numerical failure at iteration " << e.iteration() << ": " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "sparsecp: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
