#pragma once

// ADMM-type block solver for sparse-factor CP completion:
//
//   minimize  NLL(X_S) + lambda * ||C||_0
//   s.t.      X = [A, B, C],  |X| <= X_max,  |A| <= A_max,  |B| <= B_max,  |C| <= C_max
//
// One outer iteration runs, with the multiplier Lambda and penalty rho frozen:
//   S1  X  <- entrywise minimizer of the augmented Lagrangian (clamped)
//   S2  A  <- projected gradient on the mode-1 least-squares problem
//   S3  B  <- projected gradient on the mode-2 least-squares problem
//   S4  C  <- iterative hard thresholding on the mode-3 problem
//   S5  Lambda <- Lambda + rho * (X - [A, B, C])
// followed by residual-balancing of rho.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "sparsecp/likelihood.hpp"
#include "sparsecp/sampling.hpp"
#include "sparsecp/tensor.hpp"

namespace sparsecp {

using Eigen::MatrixXd;

struct Bounds {
  double a_max = 1.0;
  double b_max = 1.0;
  double c_max = 1.0;
  double x_max = 1.0;
};

struct SolverConfig {
  double lambda_reg = 0.0;
  double rho0 = 1.0;
  double eta = 2.0;
  double delta1_stop = 1e-6;
  double delta2_stop = 1e-6;
  int t_max = 500;
  int rank = 1;
  Bounds bounds;
  int inner_iters = 50;
  double inner_tol = 1e-9;
  std::uint64_t seed = 0;
  /// Evaluate the augmented Lagrangian around every block update (diagnostic, costs ~5 reconstructions).
  bool track_descent = false;

  void validate() const;
};

struct SolverState {
  Tensor3d x;
  CPFactorsd factors;
  Tensor3d dual;  ///< multiplier Lambda for X = [A, B, C]
  double rho = 1.0;
  int t = 0;
  double delta1 = std::numeric_limits<double>::infinity();
  double delta2 = std::numeric_limits<double>::infinity();
};

struct IterationRecord {
  int t;
  double delta1;
  double delta2;
  double objective;  ///< data-term NLL + lambda * nnz(C), at [A, B, C]
  double rho;        ///< penalty used during this iteration
};

/// Augmented Lagrangian values inside one outer iteration: before S1, then after S1..S4.
struct DescentRecord {
  int t;
  std::array<double, 5> lagrangian;
};

struct SolveResult {
  CPFactorsd factors;
  Tensor3d x_hat;  ///< cp_reconstruct(factors)
  int iterations = 0;
  std::vector<IterationRecord> history;
  std::vector<DescentRecord> descent;
  bool converged = false;
};

/// Observations scattered onto the full grid, as used by the entrywise X update.
struct ObservedTensor {
  Dims dims;
  VectorX<double> mask;  ///< 1 on S, 0 elsewhere
  VectorX<double> y;     ///< y on S, 0 elsewhere

  explicit ObservedTensor(const Observations& obs);
};

/// Exact minimizer of (1/2a)(c - z)^2 + lambda*[c != 0] over c in {0} u [-box, box],
/// with threshold_sq = 2*lambda*a. Keeps c = clamp(z) iff z^2 - (c - z)^2 > threshold_sq;
/// ties go to zero.
double scalar_l0_box_prox(double z, double threshold_sq, double box);

/// Residual balancing: grow rho when the primal residual dominates, shrink it
/// when the dual residual dominates.
double adapt_rho(double rho, double delta1, double delta2, double eta);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration from a
/// fixed start vector.
double largest_eigenvalue(const MatrixXd& gram, int max_steps = 100, double tol = 1e-10);

/// min_M ||Z - M kr^T||_F^2 over |M| <= box by projected gradient with step 1/L.
MatrixXd update_factor_pgd(const MatrixXd& target, const MatrixXd& kr, const MatrixXd& init, double box,
                           int inner_iters, double inner_tol);

/// Same iteration as update_factor_pgd, given Z*kr and kr^T*kr.
MatrixXd pgd_normal_form(const MatrixXd& target_kr, const MatrixXd& gram, const MatrixXd& init, double box,
                         int inner_iters, double inner_tol);

/// min_C (rho/2)||Z3 - kr C^T||_F^2 + lambda ||C||_0 over |C| <= box by iterative
/// hard thresholding with step 1/(rho L). Z3 is (n1 n2) x n3, kr is (n1 n2) x F.
MatrixXd update_c_iht(const MatrixXd& z3, const MatrixXd& kr, const MatrixXd& init, double lambda_reg, double rho,
                      double box, int inner_iters, double inner_tol = 1e-9);

/// Same iteration as update_c_iht, given Z3^T*kr and kr^T*kr.
MatrixXd iht_normal_form(const MatrixXd& target_kr, const MatrixXd& gram, const MatrixXd& init, double lambda_reg,
                         double rho, double box, int inner_iters, double inner_tol);

/// S1. Unobserved entries: clamp(m - mu/rho); observed: clamp of the Gaussian prox.
Tensor3d update_x(const SolverState& state, const ObservedTensor& obs, const GaussianModel& model, double x_max);
Tensor3d update_x(const SolverState& state, const Observations& obs, const GaussianModel& model, double x_max);

/// S5. dual + rho * (X - [A, B, C]) with the state's current rho.
Tensor3d update_dual(const SolverState& state);

/// Data term + lambda*nnz(C) + <Lambda, X - M> + (rho/2)||X - M||^2, M = [A, B, C].
/// Box indicators are not included; feasibility is maintained separately.
double augmented_lagrangian(const SolverState& state, const ObservedTensor& obs, const GaussianModel& model,
                            double lambda_reg);

/// Uniform factor entries on [-bound/2, bound/2], X = clamp([A, B, C]), zero dual.
SolverState initial_state(const Dims& dims, const SolverConfig& config);

using IterationObserver = std::function<void(const SolverState&)>;

SolveResult solve(const Observations& obs, const SolverConfig& config, const IterationObserver& observer = {});

}  // namespace sparsecp
