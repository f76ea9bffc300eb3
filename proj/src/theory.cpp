#include "sparsecp/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparsecp/errors.hpp"

namespace sparsecp::theory {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive and finite");
}

/// ceil(e), with e snapped to the nearest integer when within 1e-12 of it so
/// exact powers of two do not round up.
int snapped_ceil(double e) {
  const double r = std::round(e);
  if (std::abs(e - r) <= 1e-12 * std::max(1.0, std::abs(e))) e = r;
  return static_cast<int>(std::ceil(e));
}

}  // namespace

std::int64_t ProblemSize::n_max() const { return std::max({n1, n2, n3, rank}); }

double compute_beta(std::int64_t rank, double a_max, double b_max, double c_max, double x_max, std::int64_t n_max) {
  if (rank <= 0) throw ConfigError("compute_beta: F must be positive");
  require_positive(a_max, "A_max");
  require_positive(b_max, "B_max");
  require_positive(c_max, "C_max");
  require_positive(x_max, "X_max");
  if (n_max < 2) throw ConfigError("compute_beta: n_max must be at least 2");
  const double ratio = 14.0 * static_cast<double>(rank) * a_max * b_max * c_max / x_max;
  return std::max(1.0, 1.0 + std::log(ratio + 1.0) / std::log(static_cast<double>(n_max)));
}

double compute_qd_gaussian(double x_max, double sigma) {
  require_positive(x_max, "X_max");
  require_positive(sigma, "sigma");
  return 2.0 * x_max * x_max / (sigma * sigma);
}

double lambda_lower_bound(double beta, double q, std::int64_t n_max) {
  return 4.0 * (beta + 2.0) * (1.0 + 2.0 * q / 3.0) * std::log(static_cast<double>(n_max));
}

double compute_lambda(double beta, double q_d, std::int64_t n_max) {
  require_positive(beta, "beta");
  require_positive(q_d, "Q_D");
  if (n_max < 1) throw ConfigError("compute_lambda: n_max must be positive");
  return 4.0 * (1.0 + 2.0 * q_d / 3.0) * (beta + 2.0) * std::log(static_cast<double>(n_max));
}

std::uint64_t levels(std::int64_t n_max, double beta) {
  if (n_max < 1) throw ConfigError("levels: n_max must be positive");
  if (!(beta >= 1.0)) throw ConfigError("levels: beta must be at least 1");
  const int e = snapped_ceil(beta * std::log2(static_cast<double>(n_max)));
  if (e > 62) throw ConfigError("levels: L_lev exceeds 2^62");
  return std::uint64_t{1} << e;
}

std::uint64_t location_levels(std::int64_t n3, std::int64_t rank) {
  if (n3 <= 0 || rank <= 0) throw ConfigError("location_levels: n3 and F must be positive");
  const auto count = static_cast<std::uint64_t>(n3 * rank);
  std::uint64_t l = 1;
  while (l < count) l <<= 1;
  return l;
}

double penalty(const ProblemSize& size, std::int64_t c_nnz, double beta) {
  if (c_nnz < 0 || c_nnz > size.n3 * size.rank) {
    throw ConfigError("penalty: nnz(C) = " + std::to_string(c_nnz) + " outside [0, n3 F]");
  }
  const double lev_bits = std::log2(static_cast<double>(levels(size.n_max(), beta)));
  const double loc_bits = std::log2(static_cast<double>(location_levels(size.n3, size.rank)));
  return static_cast<double>((size.n1 + size.n2) * size.rank) * lev_bits + static_cast<double>(c_nnz) * (loc_bits + lev_bits);
}

bool code_length_bound_holds(const ProblemSize& size, double beta) {
  const double bits = std::log2(static_cast<double>(location_levels(size.n3, size.rank))) +
                      std::log2(static_cast<double>(levels(size.n_max(), beta)));
  return bits <= 2.0 * (beta + 2.0) * std::log(static_cast<double>(size.n_max()));
}

bool levels_cover_quantization(std::uint64_t l_lev, std::int64_t rank, double a_max, double b_max, double c_max,
                               double x_max) {
  return static_cast<double>(l_lev) >= 14.0 * static_cast<double>(rank) * a_max * b_max * c_max / x_max + 1.0;
}

bool levels_cover_sample_size(std::uint64_t l_lev, std::int64_t rank, double m, double a_max, double b_max,
                              double c_max, double x_max) {
  return static_cast<double>(l_lev) >= 7.0 * static_cast<double>(rank) * std::sqrt(m) * a_max * b_max * c_max / x_max;
}

std::int64_t degrees_of_freedom(std::int64_t n1, std::int64_t n2, std::int64_t rank, std::int64_t c_nnz) {
  if (n1 < 0 || n2 < 0 || rank < 0 || c_nnz < 0) throw ConfigError("degrees_of_freedom: inputs must be nonnegative");
  return (n1 + n2) * rank + c_nnz;
}

double error_bound_rhs(const ProblemSize& size, std::int64_t c_nnz, double m, double sigma, double x_max, double beta) {
  const double total = static_cast<double>(size.n1 * size.n2 * size.n3);
  if (!(m >= 1.0 && m <= total)) throw ConfigError("error_bound_rhs: m must lie in [1, n1 n2 n3]");
  require_positive(sigma, "sigma");
  require_positive(x_max, "X_max");
  const double x2 = x_max * x_max;
  const double dof = static_cast<double>(degrees_of_freedom(size.n1, size.n2, size.rank, c_nnz));
  return 70.0 * x2 * std::log(m) / m +
         24.0 * (sigma * sigma + 2.0 * x2) * (beta + 2.0) * std::log(static_cast<double>(size.n_max())) * dof / m;
}

BoundReport evaluate_bounds(const BoundInputs& in) {
  const auto& s = in.size;
  const std::int64_t n_max = s.n_max();
  BoundReport r{};
  r.beta = compute_beta(s.rank, in.a_max, in.b_max, in.c_max, in.x_max, n_max);
  r.l_lev = levels(n_max, r.beta);
  r.l_loc = location_levels(s.n3, s.rank);
  r.q_d = compute_qd_gaussian(in.x_max, in.sigma);
  r.lambda = compute_lambda(r.beta, r.q_d, n_max);
  r.lambda_min = lambda_lower_bound(r.beta, r.q_d, n_max);
  r.penalty_bits = penalty(s, in.c_nnz, r.beta);
  r.dof = degrees_of_freedom(s.n1, s.n2, s.rank, in.c_nnz);
  r.dof_matricized = s.n1 * s.n2 * s.rank + in.c_nnz;
  r.m = in.m;
  r.rhs = error_bound_rhs(s, in.c_nnz, in.m, in.sigma, in.x_max, r.beta);
  r.code_length_bound = code_length_bound_holds(s, r.beta);
  r.quantization_predicate = levels_cover_quantization(r.l_lev, s.rank, in.a_max, in.b_max, in.c_max, in.x_max);
  r.sample_size_predicate = levels_cover_sample_size(r.l_lev, s.rank, in.m, in.a_max, in.b_max, in.c_max, in.x_max);
  return r;
}

}  // namespace sparsecp::theory
