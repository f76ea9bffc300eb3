#pragma once

// Dense 3-way tensors, CP factor triples, unfoldings and Khatri-Rao products.
//
// Storage order: entry (i, j, k) lives at i + j*n1 + k*n1*n2. With Eigen's
// column-major default this makes the raw buffer viewable without copies as
// the mode-1 unfolding (n1 x n2*n3) and as the transposed mode-3 unfolding
// (n1*n2 x n3).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "sparsecp/errors.hpp"

namespace sparsecp {

using Index = Eigen::Index;
using Dims = std::array<Index, 3>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline std::string to_string(const Dims& d) {
  return "(" + std::to_string(d[0]) + "," + std::to_string(d[1]) + "," + std::to_string(d[2]) + ")";
}

inline Index dims_product(const Dims& d) { return d[0] * d[1] * d[2]; }

template <typename Scalar>
class Tensor3 {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  Tensor3() : dims_{0, 0, 0} {}

  explicit Tensor3(const Dims& dims) : dims_(checked(dims)), values_(Vector::Zero(dims_product(dims))) {}

  Tensor3(const Dims& dims, Vector values) : dims_(checked(dims)), values_(std::move(values)) {
    if (values_.size() != dims_product(dims_)) {
      throw DimensionError("tensor " + to_string(dims_) + " needs " + std::to_string(dims_product(dims_)) +
                           " values, got " + std::to_string(values_.size()));
    }
  }

  static Tensor3 Zero(const Dims& dims) { return Tensor3(dims); }
  static Tensor3 Constant(const Dims& dims, Scalar v) {
    return Tensor3(dims, Vector::Constant(dims_product(dims), v));
  }

  const Dims& dims() const { return dims_; }
  Index dim(int mode) const { return dims_[mode]; }
  Index size() const { return values_.size(); }

  Index linear_index(Index i, Index j, Index k) const { return i + dims_[0] * (j + dims_[1] * k); }

  Scalar operator()(Index i, Index j, Index k) const { return values_[linear_index(i, j, k)]; }
  Scalar& operator()(Index i, Index j, Index k) { return values_[linear_index(i, j, k)]; }

  const Vector& values() const { return values_; }
  Vector& values() { return values_; }

  /// n1 x (n2*n3) view, column j + k*n2.
  Eigen::Map<const Matrix> mode1_view() const {
    return Eigen::Map<const Matrix>(values_.data(), dims_[0], dims_[1] * dims_[2]);
  }
  /// (n1*n2) x n3 view, row i + j*n1; the transpose of the mode-3 unfolding.
  Eigen::Map<const Matrix> mode3t_view() const {
    return Eigen::Map<const Matrix>(values_.data(), dims_[0] * dims_[1], dims_[2]);
  }
  Eigen::Map<Matrix> mode3t_view() { return Eigen::Map<Matrix>(values_.data(), dims_[0] * dims_[1], dims_[2]); }

  Scalar squared_norm() const { return values_.squaredNorm(); }
  Scalar frobenius_norm() const { return values_.norm(); }

  Tensor3& operator+=(const Tensor3& o) {
    require_same_dims(o, "+=");
    values_ += o.values_;
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    require_same_dims(o, "-=");
    values_ -= o.values_;
    return *this;
  }
  Tensor3& operator*=(Scalar s) {
    values_ *= s;
    return *this;
  }

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(Tensor3 a, Scalar s) { return a *= s; }
  friend Tensor3 operator*(Scalar s, Tensor3 a) { return a *= s; }
  friend bool operator==(const Tensor3& a, const Tensor3& b) {
    return a.dims_ == b.dims_ && a.values_ == b.values_;
  }

  void require_same_dims(const Tensor3& o, const char* what) const {
    if (dims_ != o.dims_) {
      throw DimensionError(std::string(what) + ": tensor dims " + to_string(dims_) + " vs " + to_string(o.dims_));
    }
  }

 private:
  static Dims checked(const Dims& d) {
    if (d[0] <= 0 || d[1] <= 0 || d[2] <= 0) throw DimensionError("tensor dims must be positive, got " + to_string(d));
    return d;
  }

  Dims dims_;
  Vector values_;
};

using Tensor3d = Tensor3<double>;

/// CP factor triple [A, B, C]; C is the factor carrying the sparsity prior.
template <typename Scalar>
struct CPFactors {
  using Matrix = MatrixX<Scalar>;

  Matrix a;  ///< n1 x F
  Matrix b;  ///< n2 x F
  Matrix c;  ///< n3 x F

  CPFactors() = default;
  CPFactors(Matrix a_, Matrix b_, Matrix c_) : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)) { validate(); }

  Index rank() const { return a.cols(); }
  Dims dims() const { return {a.rows(), b.rows(), c.rows()}; }

  void validate() const {
    if (a.cols() != b.cols() || a.cols() != c.cols()) {
      throw DimensionError("CP factors need equal column counts, got " + std::to_string(a.cols()) + ", " +
                           std::to_string(b.cols()) + ", " + std::to_string(c.cols()));
    }
    if (a.cols() <= 0) throw DimensionError("CP factors need at least one column");
    if (a.rows() <= 0 || b.rows() <= 0 || c.rows() <= 0) throw DimensionError("CP factors need nonempty rows");
  }

  friend bool operator==(const CPFactors& x, const CPFactors& y) { return x.a == y.a && x.b == y.b && x.c == y.c; }
};

using CPFactorsd = CPFactors<double>;

/// Column-wise Kronecker product: column f is kron(left.col(f), right.col(f)),
/// so row (i + j*right.rows()) holds right(i,f) * left(j,f).
template <typename DerivedL, typename DerivedR>
MatrixX<typename DerivedL::Scalar> khatri_rao(const Eigen::MatrixBase<DerivedL>& left,
                                              const Eigen::MatrixBase<DerivedR>& right) {
  using Scalar = typename DerivedL::Scalar;
  if (left.cols() != right.cols()) {
    throw DimensionError("khatri_rao: column mismatch " + std::to_string(left.cols()) + " vs " +
                         std::to_string(right.cols()));
  }
  const Index nr = right.rows();
  MatrixX<Scalar> out(left.rows() * nr, left.cols());
  for (Index f = 0; f < left.cols(); ++f) {
    for (Index j = 0; j < left.rows(); ++j) {
      out.col(f).segment(j * nr, nr) = left(j, f) * right.col(f);
    }
  }
  return out;
}

/// X = sum_f a_f o b_f o c_f, computed as the mode-3 identity X_(3)^T = (B kr A) C^T.
template <typename Scalar>
Tensor3<Scalar> cp_reconstruct(const CPFactors<Scalar>& f) {
  f.validate();
  Tensor3<Scalar> out(f.dims());
  out.mode3t_view().noalias() = khatri_rao(f.b, f.a) * f.c.transpose();
  return out;
}

template <typename Scalar>
MatrixX<Scalar> unfold_mode1(const Tensor3<Scalar>& t) {
  return t.mode1_view();
}

/// n2 x (n1*n3), column i + k*n1.
template <typename Scalar>
MatrixX<Scalar> unfold_mode2(const Tensor3<Scalar>& t) {
  const auto& d = t.dims();
  MatrixX<Scalar> out(d[1], d[0] * d[2]);
  for (Index k = 0; k < d[2]; ++k)
    for (Index j = 0; j < d[1]; ++j)
      for (Index i = 0; i < d[0]; ++i) out(j, i + k * d[0]) = t(i, j, k);
  return out;
}

/// n3 x (n1*n2), column i + j*n1.
template <typename Scalar>
MatrixX<Scalar> matricize_mode3(const Tensor3<Scalar>& t) {
  return t.mode3t_view().transpose();
}

template <typename Derived>
Tensor3<typename Derived::Scalar> fold_mode1(const Eigen::MatrixBase<Derived>& m, const Dims& dims) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != dims[0] || m.cols() != dims[1] * dims[2]) throw DimensionError("fold_mode1: shape mismatch");
  Tensor3<Scalar> out(dims);
  Eigen::Map<MatrixX<Scalar>>(out.values().data(), dims[0], dims[1] * dims[2]) = m;
  return out;
}

template <typename Derived>
Tensor3<typename Derived::Scalar> fold_mode2(const Eigen::MatrixBase<Derived>& m, const Dims& dims) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != dims[1] || m.cols() != dims[0] * dims[2]) throw DimensionError("fold_mode2: shape mismatch");
  Tensor3<Scalar> out(dims);
  for (Index k = 0; k < dims[2]; ++k)
    for (Index j = 0; j < dims[1]; ++j)
      for (Index i = 0; i < dims[0]; ++i) out(i, j, k) = m(j, i + k * dims[0]);
  return out;
}

template <typename Derived>
Tensor3<typename Derived::Scalar> fold_mode3(const Eigen::MatrixBase<Derived>& m, const Dims& dims) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != dims[2] || m.cols() != dims[0] * dims[1]) throw DimensionError("fold_mode3: shape mismatch");
  Tensor3<Scalar> out(dims);
  out.mode3t_view() = m.transpose();
  return out;
}

/// Matricized-tensor times Khatri-Rao product, X_(mode) * KR, for mode in {0,1,2}.
/// The Khatri-Rao matrix is the one pairing the two remaining factors in the
/// order used by the unfoldings above.
template <typename Scalar>
MatrixX<Scalar> mttkrp(const Tensor3<Scalar>& t, const CPFactors<Scalar>& f, int mode) {
  const auto& d = t.dims();
  if (f.dims() != d) throw DimensionError("mttkrp: factor dims " + to_string(f.dims()) + " vs " + to_string(d));
  switch (mode) {
    case 0:
      return t.mode1_view() * khatri_rao(f.c, f.b);
    case 1: {
      // Slice k of the tensor is an n1 x n2 block; KR(C, A) restricted to
      // rows of that slice equals A * diag(C(k, :)).
      MatrixX<Scalar> out = MatrixX<Scalar>::Zero(d[1], f.rank());
      MatrixX<Scalar> scaled(d[0], f.rank());
      for (Index k = 0; k < d[2]; ++k) {
        scaled = f.a * f.c.row(k).asDiagonal();
        Eigen::Map<const MatrixX<Scalar>> slice(t.values().data() + k * d[0] * d[1], d[0], d[1]);
        out.noalias() += slice.transpose() * scaled;
      }
      return out;
    }
    case 2:
      return t.mode3t_view().transpose() * khatri_rao(f.b, f.a);
    default:
      throw DimensionError("mttkrp: mode must be 0, 1 or 2");
  }
}

/// Gram matrix of the Khatri-Rao product used with mttkrp(..., mode), formed as
/// the Hadamard product of the two small factor Grams.
template <typename Scalar>
MatrixX<Scalar> khatri_rao_gram(const CPFactors<Scalar>& f, int mode) {
  switch (mode) {
    case 0:
      return (f.c.transpose() * f.c).cwiseProduct(f.b.transpose() * f.b);
    case 1:
      return (f.c.transpose() * f.c).cwiseProduct(f.a.transpose() * f.a);
    case 2:
      return (f.b.transpose() * f.b).cwiseProduct(f.a.transpose() * f.a);
    default:
      throw DimensionError("khatri_rao_gram: mode must be 0, 1 or 2");
  }
}

template <typename Scalar>
Scalar max_abs(const Tensor3<Scalar>& t) {
  return t.size() == 0 ? Scalar(0) : t.values().cwiseAbs().maxCoeff();
}

template <typename Derived>
typename Derived::Scalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? typename Derived::Scalar(0) : m.cwiseAbs().maxCoeff();
}

/// Number of exactly nonzero entries.
template <typename Derived>
Index nnz(const Eigen::MatrixBase<Derived>& m) {
  return (m.array() != typename Derived::Scalar(0)).count();
}

template <typename Scalar>
Scalar frobenius_norm(const Tensor3<Scalar>& t) {
  return t.frobenius_norm();
}

/// Entrywise clamp to [-bound, bound].
template <typename Derived>
typename Derived::PlainObject clamp_box(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar bound) {
  return m.cwiseMax(-bound).cwiseMin(bound);
}

}  // namespace sparsecp
