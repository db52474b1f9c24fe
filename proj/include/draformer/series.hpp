#pragma once

#include "draformer/autodiff.hpp"
#include "draformer/errors.hpp"
#include "draformer/frame.hpp"
#include "draformer/linalg.hpp"
#include "draformer/tensor.hpp"

#include <string>
#include <vector>

namespace draformer {

/// One training example: L_x input rows immediately followed by L_y target rows.
struct Window {
  Matrix x;
  Matrix y;
  Index origin = 0;
};

/// Forward difference, raw values and backward difference of a window.
/// Boundary rows that would need values outside the window are zero:
/// d_fwd's last row and d_bwd's first row.
template <typename Scalar>
struct BasicDiffTriple {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Mat d_fwd;
  Mat d_bwd;
  Mat raw;
};
using DiffTriple = BasicDiffTriple<double>;

template <typename Scalar>
struct BasicCovarianceContext {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Mat sigma;
  Mat sigma_inv_reg;
  Scalar lambda{};
};
using CovarianceContext = BasicCovarianceContext<double>;

/// Sliding windows ordered by origin; count = floor((len - L_x - L_y) / stride) + 1.
std::vector<Window> make_windows(const Matrix& series, Index input_len, Index pred_len, Index stride);
inline std::vector<Window> make_windows(const TimeSeriesFrame& series, Index input_len, Index pred_len,
                                        Index stride) {
  return make_windows(series.values, input_len, pred_len, stride);
}

template <typename Derived>
BasicDiffTriple<typename Derived::Scalar> difference(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Index L = x.rows();
  if (L < 2) {
    throw InsufficientDataError("difference: need at least 2 rows, got " + std::to_string(L));
  }
  BasicDiffTriple<Scalar> out;
  out.raw = x;
  out.d_fwd.setZero(L, x.cols());
  out.d_bwd.setZero(L, x.cols());
  out.d_fwd.topRows(L - 1) = x.bottomRows(L - 1) - x.topRows(L - 1);
  out.d_bwd.bottomRows(L - 1) = out.d_fwd.topRows(L - 1);
  return out;
}

/// Pools the forward and backward difference rows as 2L draws of one
/// distribution and returns their sample covariance (denominator 2L - 1)
/// with its regularised inverse.
template <typename DF, typename DB>
BasicCovarianceContext<typename DF::Scalar> estimate_covariance(const Eigen::MatrixBase<DF>& d_fwd,
                                                                const Eigen::MatrixBase<DB>& d_bwd,
                                                                typename DF::Scalar lambda) {
  using Scalar = typename DF::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  if (d_fwd.rows() != d_bwd.rows() || d_fwd.cols() != d_bwd.cols()) {
    throw DimensionError("estimate_covariance: difference shapes " + shape_string(d_fwd) + " and " +
                         shape_string(d_bwd) + " differ");
  }
  const Index L = d_fwd.rows();
  Mat pooled(2 * L, d_fwd.cols());
  pooled << d_fwd, d_bwd;
  const auto mean = pooled.colwise().mean();
  const Mat centered = pooled.rowwise() - mean;
  BasicCovarianceContext<Scalar> ctx;
  ctx.sigma = (centered.transpose() * centered) / Scalar(2 * L - 1);
  ctx.sigma = (Scalar(0.5) * (ctx.sigma + ctx.sigma.transpose())).eval();
  ctx.lambda = lambda;
  ctx.sigma_inv_reg = regularized_inverse(ctx.sigma, lambda);
  return ctx;
}

/// Embedded views X_f = d_fwd W_f, X = raw W_x, X_b = d_bwd W_b.
struct EmbeddedTriple {
  Var ex_fwd;
  Var ex_raw;
  Var ex_bwd;
};

/// Three bias-free linear maps. Throws DimensionError when a weight is not N_x x d_model.
EmbeddedTriple embed(Tape& tape, const DiffTriple& triple, Var w_f, Var w_x, Var w_b);

/// Per-variable z-score statistics.
struct NormStats {
  Vector mean;
  Vector scale;
};

/// Mean and population standard deviation of each column. Columns with zero
/// variance get unit scale and a warning.
NormStats fit_normalization(const Matrix& training_values, const std::vector<std::string>& names = {});
Matrix normalize(const Matrix& values, const NormStats& stats);
TimeSeriesFrame normalize(const TimeSeriesFrame& frame, const NormStats& stats);
Matrix denormalize(const Matrix& values, const NormStats& stats);

}  // namespace draformer
