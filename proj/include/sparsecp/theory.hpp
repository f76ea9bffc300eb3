#pragma once

// Constants and error bounds for complexity-regularized sparse-CP completion
// under Gaussian noise.
//
// Units: log(n_max), log(m) are natural logs; code lengths (penalty, L_lev,
// L_loc exponents) are in bits (log2).

#include <cstdint>
#include <vector>

namespace sparsecp::theory {

struct ProblemSize {
  std::int64_t n1 = 1;
  std::int64_t n2 = 1;
  std::int64_t n3 = 1;
  std::int64_t rank = 1;

  /// max{n1, n2, n3, F}
  std::int64_t n_max() const;
};

/// beta = max{1, 1 + log(14 F A B C / X + 1) / log(n_max)}; requires n_max >= 2.
double compute_beta(std::int64_t rank, double a_max, double b_max, double c_max, double x_max, std::int64_t n_max);

/// Q_D = 2 X_max^2 / sigma^2, the largest per-entry Gaussian KL over the box.
double compute_qd_gaussian(double x_max, double sigma);

/// lambda = 4 (1 + 2 Q_D / 3)(beta + 2) log(n_max).
double compute_lambda(double beta, double q_d, std::int64_t n_max);

/// Smallest admissible regularizer, 4 (beta + 2)(1 + 2 Q / 3) log(n_max).
double lambda_lower_bound(double beta, double q, std::int64_t n_max);

/// L_lev = 2^ceil(log2(n_max^beta)) quantization levels per factor entry.
std::uint64_t levels(std::int64_t n_max, double beta);

/// L_loc = 2^ceil(log2(n3 F)) symbols for a location in C.
std::uint64_t location_levels(std::int64_t n3, std::int64_t rank);

/// pen(X) = (n1 + n2) F log2 L_lev + nnz(C) log2(L_loc L_lev), in bits.
double penalty(const ProblemSize& size, std::int64_t c_nnz, double beta);

/// log2(L_loc L_lev) <= 2 (beta + 2) log(n_max). Meaningful for n_max >= 4.
bool code_length_bound_holds(const ProblemSize& size, double beta);

/// L_lev >= 14 F A B C / X + 1.
bool levels_cover_quantization(std::uint64_t l_lev, std::int64_t rank, double a_max, double b_max, double c_max,
                               double x_max);

/// L_lev >= 7 F sqrt(m) A B C / X.
bool levels_cover_sample_size(std::uint64_t l_lev, std::int64_t rank, double m, double a_max, double b_max,
                              double c_max, double x_max);

/// (n1 + n2) F + nnz(C).
std::int64_t degrees_of_freedom(std::int64_t n1, std::int64_t n2, std::int64_t rank, std::int64_t c_nnz);

/// Upper bound on E||X* - X_hat||_F^2 / (n1 n2 n3) for m expected samples:
///   70 X^2 log m / m + 24 (sigma^2 + 2 X^2)(beta + 2) log(n_max) ((n1 + n2) F + nnz(C*)) / m.
double error_bound_rhs(const ProblemSize& size, std::int64_t c_nnz, double m, double sigma, double x_max, double beta);

/// Everything the `bound` command reports for one parameter set.
struct BoundReport {
  double beta;
  std::uint64_t l_lev;
  std::uint64_t l_loc;
  double q_d;
  double lambda;
  double lambda_min;
  double penalty_bits;
  std::int64_t dof;
  std::int64_t dof_matricized;
  double m;
  double rhs;
  bool code_length_bound;
  bool quantization_predicate;
  bool sample_size_predicate;
};

struct BoundInputs {
  ProblemSize size;
  std::int64_t c_nnz = 0;
  double m = 1.0;
  double sigma = 1.0;
  double a_max = 1.0;
  double b_max = 1.0;
  double c_max = 1.0;
  double x_max = 1.0;
};

BoundReport evaluate_bounds(const BoundInputs& in);

}  // namespace sparsecp::theory
