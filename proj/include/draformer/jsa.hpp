#pragma once

// Distributed difference attention. Difference rows are standardised by a
// covariance-driven learnable weighting, mapped to distributions by softmax,
// and compared pairwise with the Jensen-Shannon divergence (base 2).

#include "draformer/autodiff.hpp"
#include "draformer/params.hpp"
#include "draformer/series.hpp"

#include <string>

namespace draformer {

struct JsaParams {
  Var w_mu;  // N_x x 1
  Var w_s;   // N_x x 1
  Var w_vf;  // N_x x d_model
  Var w_vb;  // N_x x d_model

  static void declare(ParamStore& store, const std::string& prefix, Index n_vars, Index d_model, ParamInit& init);
  static JsaParams bind(Tape& tape, const ParamStore& store, const std::string& prefix);
};

/// softmax(Sigma w) as an N x 1 column summing to one.
Var mixing_weights(Tape& tape, const Matrix& sigma, Var w);

struct ZTransform {
  Var mu;  // L x 1 weighted mean per row
  Var s;   // L x 1 weighted spread per row
  Var z;   // L x N
};

/// Row-wise (x_t - mu_t) / (s_t + eps) with mu_t = x_t . a_mu and
/// s_t = sqrt(sum_n (x_tn - mu_t)^2 a_s[n]).
ZTransform z_transform(Var x, Var a_mu, Var a_s, double epsilon);
ZTransform z_transform(Tape& tape, Var x, const CovarianceContext& cov, Var w_mu, Var w_s, double epsilon);

/// J(i, j) = JS(softmax(z_fwd_i), softmax(z_bwd_j)) in bits.
Var js_matrix(Var z_fwd, Var z_bwd);

struct JsaScores {
  Var a_mu;
  Var a_s;
  Var z_fwd;
  Var z_bwd;
  Var p_fwd;
  Var p_bwd;
  Var j;       // L_x x L_x, entries in [0, 1]
  Var output;  // L_x x d_model
};

/// output = J (z_fwd w_vf) + J^T (z_bwd w_vb).
JsaScores jsa_forward(Tape& tape, const DiffTriple& triple, const CovarianceContext& cov, const JsaParams& params,
                      double epsilon = 1e-3);

}  // namespace draformer
