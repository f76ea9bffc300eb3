#pragma once

#include <cmath>
#include <numbers>

#include "sparsecp/sampling.hpp"
#include "sparsecp/tensor.hpp"

namespace sparsecp {

/// Additive white Gaussian noise with known standard deviation.
///
/// Other noise models (Laplace, Poisson, quantized) would provide the same
/// three members: per-entry negative log-density, its derivative in x, and the
/// scalar proximal step used by the solver's X update.
struct GaussianModel {
  double sigma;

  explicit GaussianModel(double sigma_) : sigma(sigma_) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("GaussianModel: sigma must be positive and finite");
  }

  double variance() const { return sigma * sigma; }

  /// -log p_x(y) without the normalizing constant.
  double entry_data_term(double y, double x) const { return (y - x) * (y - x) / (2.0 * variance()); }

  double entry_gradient(double y, double x) const { return (x - y) / variance(); }

  /// argmin_x (y - x)^2 / (2 sigma^2) + (rho / 2)(x - v)^2.
  double prox(double y, double v, double rho) const {
    const double w = 1.0 / variance();
    return (w * y + rho * v) / (w + rho);
  }

  /// log(2 pi sigma^2) / 2, the per-sample normalizing term.
  double log_normalizer() const { return 0.5 * std::log(2.0 * std::numbers::pi * variance()); }
};

namespace detail {
inline void require_obs_dims(const Tensor3d& x, const Observations& obs, const char* what) {
  if (x.dims() != obs.dims()) {
    throw DimensionError(std::string(what) + ": tensor dims " + to_string(x.dims()) + " vs observation dims " +
                         to_string(obs.dims()));
  }
}
}  // namespace detail

/// sum_S (y - x)^2 / (2 sigma^2): the part of the NLL the solver minimizes.
inline double nll_data_term(const GaussianModel& model, const Tensor3d& x, const Observations& obs) {
  detail::require_obs_dims(x, obs, "nll_data_term");
  double acc = 0.0;
  for (std::size_t t = 0; t < obs.size(); ++t) acc += model.entry_data_term(obs.values[t], x.values()[obs.samples.linear(t)]);
  return acc;
}

/// Full negative log-likelihood, including (|S|/2) log(2 pi sigma^2).
inline double neg_log_likelihood(const GaussianModel& model, const Tensor3d& x, const Observations& obs) {
  return static_cast<double>(obs.size()) * model.log_normalizer() + nll_data_term(model, x, obs);
}

/// Gradient in X: (x - y)/sigma^2 on S, zero elsewhere.
inline Tensor3d nll_gradient(const GaussianModel& model, const Tensor3d& x, const Observations& obs) {
  detail::require_obs_dims(x, obs, "nll_gradient");
  Tensor3d g(x.dims());
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const Index lin = obs.samples.linear(t);
    g.values()[lin] = model.entry_gradient(obs.values[t], x.values()[lin]);
  }
  return g;
}

/// KL divergence between N(x_star, sigma^2) and N(x, sigma^2).
template <typename Scalar>
Scalar gaussian_kl(Scalar x_star, Scalar x, Scalar sigma) {
  const Scalar d = x_star - x;
  return d * d / (Scalar(2) * sigma * sigma);
}

/// -2 log of the Hellinger affinity between N(x_star, sigma^2) and N(x, sigma^2).
template <typename Scalar>
Scalar gaussian_neg2log_affinity(Scalar x_star, Scalar x, Scalar sigma) {
  const Scalar d = x_star - x;
  return d * d / (Scalar(4) * sigma * sigma);
}

}  // namespace sparsecp
