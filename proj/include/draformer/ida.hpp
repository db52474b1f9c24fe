#pragma once

// Integrated distance attention: a learnable Gaussian kernel over the product
// of squared temporal distance and regularised squared Mahalanobis distance
// between forward- and backward-difference rows.

#include "draformer/autodiff.hpp"
#include "draformer/params.hpp"
#include "draformer/series.hpp"

#include <string>

namespace draformer {

/// md2(i, j) = (f_i - b_j) S (f_i - b_j)^T for rows f_i of d_fwd, b_j of d_bwd and
/// S = (Sigma + lambda I)^-1. Entries are clamped at zero against rounding.
template <typename DF, typename DB, typename DS>
Eigen::Matrix<typename DF::Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> mahalanobis_sq(
    const Eigen::MatrixBase<DF>& d_fwd, const Eigen::MatrixBase<DB>& d_bwd, const Eigen::MatrixBase<DS>& inv) {
  using Scalar = typename DF::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Index n = d_fwd.cols();
  if (d_bwd.cols() != n || inv.rows() != n || inv.cols() != n) {
    throw DimensionError("mahalanobis_sq: incompatible shapes " + shape_string(d_fwd) + ", " + shape_string(d_bwd) +
                         ", " + shape_string(inv));
  }
  const Mat fs = d_fwd * inv;
  const Mat bs = d_bwd * inv;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ff = fs.cwiseProduct(d_fwd).rowwise().sum();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bb = bs.cwiseProduct(d_bwd).rowwise().sum();
  Mat md2 = Scalar(-2) * (fs * d_bwd.transpose());
  md2.colwise() += ff;
  md2.rowwise() += bb.transpose();
  return md2.cwiseMax(Scalar(0));
}

inline Matrix mahalanobis_sq(const DiffTriple& triple, const CovarianceContext& cov) {
  return mahalanobis_sq(triple.d_fwd, triple.d_bwd, cov.sigma_inv_reg);
}

struct IdaParams {
  Var w_sigma;  // N_x x 1
  Var w_v;      // d_model x d_model

  static void declare(ParamStore& store, const std::string& prefix, Index n_vars, Index d_model, ParamInit& init);
  static IdaParams bind(Tape& tape, const ParamStore& store, const std::string& prefix);
};

struct IdaOptions {
  double sigma_floor = 1e-3;
  /// Multiply the kernel by 1 / (sqrt(2 pi) sigma_i). Row-constant, so it
  /// leaves the softmax weights unchanged; switchable for testing that.
  bool gaussian_prefactor = true;
};

struct IdaScores {
  Matrix md2;
  Var sigma;    // L_x x 1
  Var kernel;   // L_x x L_x, pre-softmax
  Var weights;  // L_x x L_x, row-stochastic
  Var output;   // L_x x d_model
};

/// sigma_i = softplus(x_raw[i] . w_sigma) + floor.
Var sigma_vector(Tape& tape, const Matrix& x_raw, Var w_sigma, double sigma_floor = 1e-3);

/// Squared temporal distance |i - j|^2 for an L x L grid.
Matrix temporal_distance_sq(Index length);

IdaScores ida_forward(Tape& tape, Var x_embedded, const Matrix& x_raw, const Matrix& md2, const IdaParams& params,
                      const IdaOptions& options = {});

IdaScores ida_forward(Tape& tape, Var x_embedded, const DiffTriple& triple, const CovarianceContext& cov,
                      const IdaParams& params, const IdaOptions& options = {});

}  // namespace draformer
