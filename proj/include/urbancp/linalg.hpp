#pragma once

#include <Eigen/Dense>

#include <algorithm>

#include "urbancp/tensor.hpp"

namespace urbancp {

/// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kPinvRelativeCutoff = 1e-12;

/// Moore-Penrose inverse through the SVD, truncating singular values below
/// kPinvRelativeCutoff * sigma_max. Defined for every shape, including empty
/// and all-zero matrices (whose inverse is the zero matrix of transposed shape).
inline Matrix pseudo_inverse(const Matrix& m) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = kPinvRelativeCutoff * (s.size() > 0 ? s(0) : 0.0);
  Vector inv = Vector::Zero(s.size());
  for (Index n = 0; n < s.size(); ++n)
    if (s(n) > cutoff && s(n) > 0.0) inv(n) = 1.0 / s(n);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Computes pinv(S) * rhs for a symmetric positive semidefinite S.
///
/// For symmetric PSD matrices the eigendecomposition is an SVD, so the
/// truncation rule matches pseudo_inverse(). When `diag_shift` (a known lower
/// bound on the smallest eigenvalue) already exceeds the cutoff relative to an
/// upper bound on the largest eigenvalue, nothing would be truncated and the
/// pseudo-inverse equals the inverse; a Cholesky solve is used then.
inline Vector pinv_solve_psd(const Matrix& S, const Vector& rhs, double diag_shift = 0.0) {
  detail::require(S.rows() == S.cols() && S.rows() == rhs.size(),
                  "pinv_solve_psd: shape mismatch");
  if (S.size() == 0) return Vector::Zero(0);
  if (diag_shift > 0.0) {
    const double upper = S.cwiseAbs().rowwise().sum().maxCoeff();
    if (diag_shift > kPinvRelativeCutoff * upper) {
      Eigen::LLT<Matrix> llt(S);
      if (llt.info() == Eigen::Success) return llt.solve(rhs);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  const Vector& ev = eig.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  const double cutoff = kPinvRelativeCutoff * top;
  Vector proj = eig.eigenvectors().transpose() * rhs;
  for (Index n = 0; n < ev.size(); ++n)
    proj(n) = std::abs(ev(n)) > cutoff && ev(n) != 0.0 ? proj(n) / ev(n) : 0.0;
  return eig.eigenvectors() * proj;
}

}  // namespace urbancp
