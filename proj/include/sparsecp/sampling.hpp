#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sparsecp/tensor.hpp"

namespace sparsecp {

using Triple = std::array<Index, 3>;

/// Observed index set S. Indices are distinct and sorted by linear index
/// i + j*n1 + k*n1*n2 (k slowest).
class SampleSet {
 public:
  SampleSet() : dims_{1, 1, 1} {}
  SampleSet(const Dims& dims, std::vector<Triple> indices);

  const Dims& dims() const { return dims_; }
  const std::vector<Triple>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }

  Index linear(std::size_t t) const {
    const auto& [i, j, k] = indices_[t];
    return i + dims_[0] * (j + dims_[1] * k);
  }

  /// 0/1 indicator over all n1*n2*n3 entries in storage order.
  VectorX<double> dense_mask() const;

  friend bool operator==(const SampleSet&, const SampleSet&) = default;

 private:
  Dims dims_;
  std::vector<Triple> indices_;
};

/// Noisy samples y at S with known noise level sigma.
struct Observations {
  SampleSet samples;
  std::vector<double> values;
  double sigma = 1.0;

  Observations() = default;
  Observations(SampleSet s, std::vector<double> v, double sigma_);

  const Dims& dims() const { return samples.dims(); }
  std::size_t size() const { return values.size(); }

  friend bool operator==(const Observations&, const Observations&) = default;
};

/// Each entry kept independently with probability gamma in (0, 1].
SampleSet sample_bernoulli_mask(const Dims& dims, double gamma, std::uint64_t seed);

/// sigma * z for `count` standard normal draws z of the noise stream `seed`.
std::vector<double> gaussian_noise(std::size_t count, double sigma, std::uint64_t seed);

/// y = truth|_S + gaussian_noise(|S|, sigma, seed).
Observations observe_gaussian(const Tensor3d& truth, const SampleSet& mask, double sigma, std::uint64_t seed);

}  // namespace sparsecp
