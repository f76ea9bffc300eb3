#include "sparsecp/sampling.hpp"

#include <cmath>

#include "sparsecp/rng.hpp"

namespace sparsecp {

SampleSet::SampleSet(const Dims& dims, std::vector<Triple> indices) : dims_(dims), indices_(std::move(indices)) {
  if (dims_[0] <= 0 || dims_[1] <= 0 || dims_[2] <= 0) throw DimensionError("sample set dims must be positive");
  Index prev = -1;
  for (std::size_t t = 0; t < indices_.size(); ++t) {
    const auto& [i, j, k] = indices_[t];
    if (i < 0 || i >= dims_[0] || j < 0 || j >= dims_[1] || k < 0 || k >= dims_[2]) {
      throw DimensionError("sample index (" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) +
                           ") outside dims " + to_string(dims_));
    }
    const Index lin = linear(t);
    if (lin <= prev) throw DimensionError("sample indices must be strictly increasing in storage order");
    prev = lin;
  }
}

VectorX<double> SampleSet::dense_mask() const {
  VectorX<double> m = VectorX<double>::Zero(dims_product(dims_));
  for (std::size_t t = 0; t < indices_.size(); ++t) m[linear(t)] = 1.0;
  return m;
}

Observations::Observations(SampleSet s, std::vector<double> v, double sigma_)
    : samples(std::move(s)), values(std::move(v)), sigma(sigma_) {
  if (values.size() != samples.size()) {
    throw DimensionError("observations: " + std::to_string(values.size()) + " values for " +
                         std::to_string(samples.size()) + " indices");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("observations: sigma must be positive and finite");
}

SampleSet sample_bernoulli_mask(const Dims& dims, double gamma, std::uint64_t seed) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("sampling rate gamma must lie in (0, 1]");
  Rng rng(seed);
  std::vector<Triple> idx;
  idx.reserve(static_cast<std::size_t>(gamma * static_cast<double>(dims_product(dims))) + 16);
  for (Index k = 0; k < dims[2]; ++k)
    for (Index j = 0; j < dims[1]; ++j)
      for (Index i = 0; i < dims[0]; ++i)
        if (rng.uniform() < gamma) idx.push_back({i, j, k});
  return SampleSet(dims, std::move(idx));
}

std::vector<double> gaussian_noise(std::size_t count, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(count);
  for (auto& v : out) v = sigma * rng.normal();
  return out;
}

Observations observe_gaussian(const Tensor3d& truth, const SampleSet& mask, double sigma, std::uint64_t seed) {
  if (truth.dims() != mask.dims()) {
    throw DimensionError("observe_gaussian: truth dims " + to_string(truth.dims()) + " vs mask dims " +
                         to_string(mask.dims()));
  }
  if (!(sigma > 0.0)) throw ConfigError("observe_gaussian: sigma must be positive");
  std::vector<double> values = gaussian_noise(mask.size(), sigma, seed);
  for (std::size_t t = 0; t < values.size(); ++t) values[t] += truth.values()[mask.linear(t)];
  return Observations(mask, std::move(values), sigma);
}

}  // namespace sparsecp
