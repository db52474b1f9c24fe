#pragma once

#include "draformer/errors.hpp"
#include "draformer/tensor.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

namespace draformer {

/// Inverse of (sigma + lambda * I) through a Cholesky factorisation.
///
/// sigma must be square and symmetric within 1e-8. The result is symmetrised
/// and checked: every entry of inverse * (sigma + lambda * I) must lie within
/// 1e-6 of the identity, otherwise SingularityError is thrown.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> regularized_inverse(
    const Eigen::MatrixBase<Derived>& sigma, typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  if (sigma.rows() != sigma.cols()) {
    throw DimensionError("regularized_inverse: covariance must be square, got " + shape_string(sigma));
  }
  if (!(lambda >= Scalar(0))) throw DomainError("regularized_inverse: lambda must be non-negative");
  const Index n = sigma.rows();
  const Scalar asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (n > 0 && asym > Scalar(1e-8)) {
    throw DomainError("regularized_inverse: covariance not symmetric (max deviation " +
                      std::to_string(static_cast<double>(asym)) + ")");
  }
  const Mat regularized = sigma + lambda * Mat::Identity(n, n);
  Eigen::LLT<Mat> llt(regularized);
  if (llt.info() != Eigen::Success) {
    throw SingularityError("regularized_inverse: Cholesky factorisation failed (matrix not positive definite)");
  }
  Mat inv = llt.solve(Mat::Identity(n, n));
  inv = (Scalar(0.5) * (inv + inv.transpose())).eval();
  const Scalar residual = (inv * regularized - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
  if (n > 0 && !(residual <= Scalar(1e-6))) {
    throw SingularityError("regularized_inverse: residual " + std::to_string(static_cast<double>(residual)) +
                           " exceeds 1e-6");
  }
  return inv;
}

}  // namespace draformer
