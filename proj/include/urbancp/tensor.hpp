#pragma once

// Dense third-order tensor algebra.
//
// Storage layout (used everywhere in the library and in the binary tensor
// container): first index fastest,
//
//     offset(i, j, k) = i + I1 * (j + I2 * k)
//
// Unfoldings follow the Khatri-Rao convention so that a CP tensor
// X = [[A, B, C]] satisfies
//
//     X_(1) = A (C ⊙ B)^T     X_(1)(i, j + I2*k) = x(i, j, k)
//     X_(2) = B (C ⊙ A)^T     X_(2)(j, i + I1*k) = x(i, j, k)
//     X_(3) = C (B ⊙ A)^T     X_(3)(k, i + I1*j) = x(i, j, k)
//
// With this layout X_(1) is the raw payload viewed as an I1 x (I2*I3)
// column-major matrix.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "urbancp/error.hpp"

namespace urbancp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

using Dims = std::array<Index, 3>;

inline std::string to_string(const Dims& d) {
  return std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" +
         std::to_string(d[2]);
}

class Tensor3 {
 public:
  Tensor3() = default;

  explicit Tensor3(const Dims& dims, double fill = 0.0) : dims_(dims) {
    detail::require(dims[0] > 0 && dims[1] > 0 && dims[2] > 0,
                    "tensor dimensions must be positive, got " + to_string(dims));
    data_.assign(static_cast<std::size_t>(dims[0] * dims[1] * dims[2]), fill);
  }

  Tensor3(const Dims& dims, std::vector<double> data)
      : dims_(dims), data_(std::move(data)) {
    detail::require(dims[0] > 0 && dims[1] > 0 && dims[2] > 0,
                    "tensor dimensions must be positive, got " + to_string(dims));
    detail::require(data_.size() == static_cast<std::size_t>(dims[0] * dims[1] * dims[2]),
                    "tensor payload length does not match dimensions " + to_string(dims));
  }

  const Dims& dims() const noexcept { return dims_; }
  Index dim(int n) const { return dims_[static_cast<std::size_t>(n)]; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(Index i, Index j, Index k) { return data_[offset(i, j, k)]; }
  double operator()(Index i, Index j, Index k) const { return data_[offset(i, j, k)]; }

  std::size_t offset(Index i, Index j, Index k) const noexcept {
    return static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k));
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  /// Mode-3 fiber x(i, j, :).
  std::vector<double> fiber(Index i, Index j) const {
    std::vector<double> out(static_cast<std::size_t>(dims_[2]));
    for (Index k = 0; k < dims_[2]; ++k) out[static_cast<std::size_t>(k)] = (*this)(i, j, k);
    return out;
  }

  double sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Dims dims_{0, 0, 0};
  std::vector<double> data_;
};

/// CP factor matrices: A (I1 x R), B (I2 x R), C (I3 x R).
struct FactorSet {
  Matrix A;
  Matrix B;
  Matrix C;

  Index rank() const noexcept { return A.cols(); }

  void validate() const {
    detail::require(A.cols() == B.cols() && B.cols() == C.cols(),
                    "factor matrices must share the same column count (rank)");
    detail::require(A.cols() > 0, "rank must be positive");
  }
};

/// Elementwise product.
inline Tensor3 hadamard(const Tensor3& t1, const Tensor3& t2) {
  detail::require(t1.dims() == t2.dims(), "hadamard: dimension mismatch " +
                                              to_string(t1.dims()) + " vs " +
                                              to_string(t2.dims()));
  Tensor3 out(t1.dims());
  for (std::size_t n = 0; n < out.size(); ++n) out.data()[n] = t1.data()[n] * t2.data()[n];
  return out;
}

inline Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Columnwise Kronecker product; row p * b.rows() + q holds a(p, r) * b(q, r).
inline Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  detail::require(a.cols() == b.cols(), "khatri_rao: column counts differ (" +
                                            std::to_string(a.cols()) + " vs " +
                                            std::to_string(b.cols()) + ")");
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Index r = 0; r < a.cols(); ++r)
    for (Index p = 0; p < a.rows(); ++p)
      out.col(r).segment(p * b.rows(), b.rows()) = a(p, r) * b.col(r);
  return out;
}

namespace detail {
inline void check_mode(int mode) {
  require(mode >= 1 && mode <= 3, "mode must be 1, 2 or 3, got " + std::to_string(mode));
}
}  // namespace detail

inline Matrix matricize(const Tensor3& t, int mode) {
  detail::check_mode(mode);
  const auto [I1, I2, I3] = t.dims();
  Matrix out;
  switch (mode) {
    case 1:
      out = Eigen::Map<const Matrix>(t.data().data(), I1, I2 * I3);
      break;
    case 2:
      out.resize(I2, I1 * I3);
      for (Index k = 0; k < I3; ++k)
        for (Index j = 0; j < I2; ++j)
          for (Index i = 0; i < I1; ++i) out(j, i + I1 * k) = t(i, j, k);
      break;
    default:
      out.resize(I3, I1 * I2);
      for (Index k = 0; k < I3; ++k)
        for (Index j = 0; j < I2; ++j)
          for (Index i = 0; i < I1; ++i) out(k, i + I1 * j) = t(i, j, k);
      break;
  }
  return out;
}

/// Inverse of matricize.
inline Tensor3 fold(const Matrix& m, int mode, const Dims& dims) {
  detail::check_mode(mode);
  const auto [I1, I2, I3] = dims;
  const Index rows = dims[static_cast<std::size_t>(mode - 1)];
  const Index cols = I1 * I2 * I3 / rows;
  detail::require(m.rows() == rows && m.cols() == cols,
                  "fold: matrix shape inconsistent with mode " + std::to_string(mode) +
                      " and dims " + to_string(dims));
  Tensor3 out(dims);
  switch (mode) {
    case 1:
      Eigen::Map<Matrix>(out.data().data(), I1, I2 * I3) = m;
      break;
    case 2:
      for (Index k = 0; k < I3; ++k)
        for (Index j = 0; j < I2; ++j)
          for (Index i = 0; i < I1; ++i) out(i, j, k) = m(j, i + I1 * k);
      break;
    default:
      for (Index k = 0; k < I3; ++k)
        for (Index j = 0; j < I2; ++j)
          for (Index i = 0; i < I1; ++i) out(i, j, k) = m(k, i + I1 * j);
      break;
  }
  return out;
}

/// Column stacking.
inline Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvec(const Vector& v, Index rows, Index cols) {
  detail::require(rows >= 0 && cols >= 0 && v.size() == rows * cols,
                  "unvec: vector length " + std::to_string(v.size()) +
                      " does not match " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

/// [[A, B, C]]: out(i, j, k) = sum_r A(i, r) B(j, r) C(k, r).
inline Tensor3 cp_reconstruct(const FactorSet& f) {
  f.validate();
  const Dims dims{f.A.rows(), f.B.rows(), f.C.rows()};
  detail::require(dims[0] > 0 && dims[1] > 0 && dims[2] > 0,
                  "cp_reconstruct: factor matrices must have rows");
  Tensor3 out(dims);
  Eigen::Map<Matrix>(out.data().data(), dims[0], dims[1] * dims[2]).noalias() =
      f.A * khatri_rao(f.C, f.B).transpose();
  return out;
}

inline double frobenius_norm(const Tensor3& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return std::sqrt(s);
}

}  // namespace urbancp
