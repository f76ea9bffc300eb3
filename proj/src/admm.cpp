#include "sparsecp/admm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparsecp/rng.hpp"

namespace sparsecp {

namespace {

constexpr std::uint64_t kPowerIterationSeed = 0x5EEDF00DULL;

bool finite_matrix(const MatrixXd& m) { return m.allFinite(); }

double relative_change(const MatrixXd& next, const MatrixXd& prev) {
  const double step = (next - prev).norm();
  if (step == 0.0) return 0.0;
  const double scale = next.norm();
  return scale > 0.0 ? step / scale : std::numeric_limits<double>::infinity();
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

void SolverConfig::validate() const {
  require(lambda_reg >= 0.0 && std::isfinite(lambda_reg), "lambda must be nonnegative and finite");
  require(rho0 > 0.0 && std::isfinite(rho0), "rho0 must be positive");
  require(eta > 1.0 && std::isfinite(eta), "eta must exceed 1");
  require(delta1_stop > 0.0, "delta1_stop must be positive");
  require(delta2_stop > 0.0, "delta2_stop must be positive");
  require(t_max > 0, "t_max must be positive");
  require(rank > 0, "rank F must be positive");
  require(bounds.a_max > 0.0 && bounds.b_max > 0.0 && bounds.c_max > 0.0 && bounds.x_max > 0.0,
          "all box bounds must be positive");
  require(inner_iters > 0, "inner_iters must be positive");
  require(inner_tol > 0.0, "inner_tol must be positive");
}

ObservedTensor::ObservedTensor(const Observations& obs)
    : dims(obs.dims()), mask(VectorX<double>::Zero(dims_product(dims))), y(VectorX<double>::Zero(dims_product(dims))) {
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const Index lin = obs.samples.linear(t);
    mask[lin] = 1.0;
    y[lin] = obs.values[t];
  }
}

double scalar_l0_box_prox(double z, double threshold_sq, double box) {
  const double c = std::clamp(z, -box, box);
  // Cost of c relative to zero, scaled by 2a: (c - z)^2 + 2*lambda*a versus z^2.
  const double gain = z * z - (c - z) * (c - z);
  return gain > threshold_sq ? c : 0.0;
}

double adapt_rho(double rho, double delta1, double delta2, double eta) {
  const bool grow = delta1 >= 10.0 * delta2;
  const bool shrink = delta2 >= 10.0 * delta1;
  if (grow && shrink) return rho;  // only when both residuals are zero
  if (grow) return eta * rho;
  if (shrink) return rho / eta;
  return rho;
}

double largest_eigenvalue(const MatrixXd& gram, int max_steps, double tol) {
  const Index n = gram.rows();
  if (n == 0) return 0.0;
  Rng rng(kPowerIterationSeed);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.uniform(0.5, 1.5);
  v.normalize();
  double lambda = 0.0;
  for (int step = 0; step < max_steps; ++step) {
    Eigen::VectorXd w = gram * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - lambda) <= tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

MatrixXd pgd_normal_form(const MatrixXd& target_kr, const MatrixXd& gram, const MatrixXd& init, double box,
                         int inner_iters, double inner_tol) {
  if (target_kr.rows() != init.rows() || target_kr.cols() != init.cols() || gram.rows() != init.cols() ||
      gram.cols() != init.cols()) {
    throw DimensionError("pgd: inconsistent shapes");
  }
  MatrixXd m = clamp_box(init, box);
  const double lip = largest_eigenvalue(gram);
  if (!(lip > 0.0)) return m;
  const double step = 1.0 / lip;
  MatrixXd next(m.rows(), m.cols());
  for (int it = 0; it < inner_iters; ++it) {
    next = clamp_box(m - step * (m * gram - target_kr), box);
    const double change = relative_change(next, m);
    m.swap(next);
    if (change < inner_tol) break;
  }
  return m;
}

MatrixXd update_factor_pgd(const MatrixXd& target, const MatrixXd& kr, const MatrixXd& init, double box,
                           int inner_iters, double inner_tol) {
  if (target.cols() != kr.rows() || target.rows() != init.rows() || kr.cols() != init.cols()) {
    throw DimensionError("update_factor_pgd: target " + std::to_string(target.rows()) + "x" +
                         std::to_string(target.cols()) + ", kr " + std::to_string(kr.rows()) + "x" +
                         std::to_string(kr.cols()) + ", init " + std::to_string(init.rows()) + "x" +
                         std::to_string(init.cols()));
  }
  return pgd_normal_form(target * kr, kr.transpose() * kr, init, box, inner_iters, inner_tol);
}

MatrixXd iht_normal_form(const MatrixXd& target_kr, const MatrixXd& gram, const MatrixXd& init, double lambda_reg,
                         double rho, double box, int inner_iters, double inner_tol) {
  if (target_kr.rows() != init.rows() || target_kr.cols() != init.cols() || gram.rows() != init.cols() ||
      gram.cols() != init.cols()) {
    throw DimensionError("iht: inconsistent shapes");
  }
  MatrixXd c = clamp_box(init, box);
  const double lip = largest_eigenvalue(gram);
  if (!(lip > 0.0)) return c;
  // Gradient of (rho/2)||Z3 - kr C^T||^2 is rho (C G - Z3^T kr); with alpha = 1/(rho L)
  // the gradient step is C - (C G - Z3^T kr)/L and the prox threshold is 2 lambda alpha.
  const double threshold_sq = 2.0 * lambda_reg / (rho * lip);
  MatrixXd next(c.rows(), c.cols());
  for (int it = 0; it < inner_iters; ++it) {
    next = c - (c * gram - target_kr) / lip;
    for (Index e = 0; e < next.size(); ++e) next(e) = scalar_l0_box_prox(next(e), threshold_sq, box);
    const double change = relative_change(next, c);
    c.swap(next);
    if (change < inner_tol) break;
  }
  return c;
}

MatrixXd update_c_iht(const MatrixXd& z3, const MatrixXd& kr, const MatrixXd& init, double lambda_reg, double rho,
                      double box, int inner_iters, double inner_tol) {
  if (z3.rows() != kr.rows() || z3.cols() != init.rows() || kr.cols() != init.cols()) {
    throw DimensionError("update_c_iht: inconsistent shapes");
  }
  if (!(rho > 0.0)) throw ConfigError("update_c_iht: rho must be positive");
  return iht_normal_form(z3.transpose() * kr, kr.transpose() * kr, init, lambda_reg, rho, box, inner_iters,
                         inner_tol);
}

Tensor3d update_x(const SolverState& state, const ObservedTensor& obs, const GaussianModel& model, double x_max) {
  if (state.x.dims() != obs.dims) throw DimensionError("update_x: state and observation dims differ");
  const Tensor3d m = cp_reconstruct(state.factors);
  const auto& mu = state.dual.values();
  const double rho = state.rho;
  Tensor3d out(obs.dims);
  auto& x = out.values();
  for (Index e = 0; e < x.size(); ++e) {
    const double v = m.values()[e] - mu[e] / rho;
    const double val = obs.mask[e] != 0.0 ? model.prox(obs.y[e], v, rho) : v;
    x[e] = std::clamp(val, -x_max, x_max);
  }
  return out;
}

Tensor3d update_x(const SolverState& state, const Observations& obs, const GaussianModel& model, double x_max) {
  return update_x(state, ObservedTensor(obs), model, x_max);
}

Tensor3d update_dual(const SolverState& state) {
  Tensor3d residual = state.x - cp_reconstruct(state.factors);
  return state.dual + state.rho * residual;
}

namespace {

double data_term(const VectorX<double>& m, const ObservedTensor& obs, const GaussianModel& model) {
  return (obs.y - m).cwiseProduct(obs.mask).squaredNorm() / (2.0 * model.variance());
}

}  // namespace

double augmented_lagrangian(const SolverState& state, const ObservedTensor& obs, const GaussianModel& model,
                            double lambda_reg) {
  const Tensor3d m = cp_reconstruct(state.factors);
  const VectorX<double> r = state.x.values() - m.values();
  return data_term(state.x.values(), obs, model) + lambda_reg * static_cast<double>(nnz(state.factors.c)) +
         state.dual.values().dot(r) + 0.5 * state.rho * r.squaredNorm();
}

SolverState initial_state(const Dims& dims, const SolverConfig& config) {
  config.validate();
  Rng rng(config.seed);
  auto draw = [&rng](Index rows, Index cols, double bound) {
    MatrixXd m(rows, cols);
    for (Index e = 0; e < m.size(); ++e) m(e) = rng.uniform(-0.5 * bound, 0.5 * bound);
    return m;
  };
  SolverState s;
  const Index f = config.rank;
  MatrixXd a = draw(dims[0], f, config.bounds.a_max);
  MatrixXd b = draw(dims[1], f, config.bounds.b_max);
  MatrixXd c = draw(dims[2], f, config.bounds.c_max);
  s.factors = CPFactorsd(std::move(a), std::move(b), std::move(c));
  s.x = cp_reconstruct(s.factors);
  s.x.values() = clamp_box(s.x.values(), config.bounds.x_max);
  s.dual = Tensor3d(dims);
  s.rho = config.rho0;
  return s;
}

SolveResult solve(const Observations& obs, const SolverConfig& config, const IterationObserver& observer) {
  config.validate();
  const GaussianModel model(obs.sigma);
  const ObservedTensor observed(obs);
  const Bounds& box = config.bounds;

  SolverState state = initial_state(obs.dims(), config);
  Tensor3d m_prev = cp_reconstruct(state.factors);

  SolveResult result;
  result.history.reserve(static_cast<std::size_t>(config.t_max));

  int t = 0;
  for (; t < config.t_max; ++t) {
    state.t = t;
    DescentRecord trace{t, {}};
    if (config.track_descent) trace.lagrangian[0] = augmented_lagrangian(state, observed, model, config.lambda_reg);

    // S1
    state.x = update_x(state, observed, model, box.x_max);
    if (config.track_descent) trace.lagrangian[1] = augmented_lagrangian(state, observed, model, config.lambda_reg);

    // S2-S4 all fit [A, B, C] to Z = X + Lambda/rho.
    Tensor3d z = state.x;
    z.values() += state.dual.values() / state.rho;
    auto& f = state.factors;

    f.a = pgd_normal_form(mttkrp(z, f, 0), khatri_rao_gram(f, 0), f.a, box.a_max, config.inner_iters,
                          config.inner_tol);
    if (config.track_descent) trace.lagrangian[2] = augmented_lagrangian(state, observed, model, config.lambda_reg);

    f.b = pgd_normal_form(mttkrp(z, f, 1), khatri_rao_gram(f, 1), f.b, box.b_max, config.inner_iters,
                          config.inner_tol);
    if (config.track_descent) trace.lagrangian[3] = augmented_lagrangian(state, observed, model, config.lambda_reg);

    f.c = iht_normal_form(mttkrp(z, f, 2), khatri_rao_gram(f, 2), f.c, config.lambda_reg, state.rho, box.c_max,
                          config.inner_iters, config.inner_tol);
    if (config.track_descent) {
      trace.lagrangian[4] = augmented_lagrangian(state, observed, model, config.lambda_reg);
      result.descent.push_back(trace);
    }

    const Tensor3d m_next = cp_reconstruct(f);
    const double rho_used = state.rho;
    state.delta1 = (state.x.values() - m_next.values()).norm();
    state.delta2 = rho_used * (m_prev.values() - m_next.values()).norm();

    // S5
    state.dual.values() += rho_used * (state.x.values() - m_next.values());

    const double objective =
        data_term(m_next.values(), observed, model) + config.lambda_reg * static_cast<double>(nnz(f.c));
    result.history.push_back({t, state.delta1, state.delta2, objective, rho_used});

    if (!std::isfinite(state.delta1) || !std::isfinite(state.delta2) || !std::isfinite(objective) ||
        !finite_matrix(f.a) || !finite_matrix(f.b) || !finite_matrix(f.c)) {
      throw NumericalError("solver produced a non-finite value", t);
    }

    state.rho = adapt_rho(state.rho, state.delta1, state.delta2, config.eta);
    m_prev = m_next;
    if (observer) observer(state);

    if (state.delta1 <= config.delta1_stop && state.delta2 <= config.delta2_stop) {
      result.converged = true;
      ++t;
      break;
    }
  }

  result.iterations = t;
  result.factors = state.factors;
  result.x_hat = std::move(m_prev);
  return result;
}

}  // namespace sparsecp
