#include "draformer/jsa.hpp"

namespace draformer {

void JsaParams::declare(ParamStore& store, const std::string& prefix, Index n_vars, Index d_model,
                        ParamInit& init) {
  store.add(prefix + "w_mu", init.uniform_fan_in(n_vars, 1));
  store.add(prefix + "w_s", init.uniform_fan_in(n_vars, 1));
  store.add(prefix + "w_vf", init.uniform_fan_in(n_vars, d_model));
  store.add(prefix + "w_vb", init.uniform_fan_in(n_vars, d_model));
}

JsaParams JsaParams::bind(Tape& tape, const ParamStore& store, const std::string& prefix) {
  return JsaParams{tape.param(store, prefix + "w_mu"), tape.param(store, prefix + "w_s"),
                   tape.param(store, prefix + "w_vf"), tape.param(store, prefix + "w_vb")};
}

Var mixing_weights(Tape& tape, const Matrix& sigma, Var w) {
  if (sigma.cols() != w.rows() || w.cols() != 1) {
    throw DimensionError("mixing_weights: covariance " + shape_string(sigma) + " with weight " +
                         shape_string(w.value()));
  }
  return transpose(softmax_rows(transpose(matmul(tape.constant(sigma), w))));
}

ZTransform z_transform(Var x, Var a_mu, Var a_s, double epsilon) {
  if (a_mu.rows() != x.cols() || a_s.rows() != x.cols()) {
    throw DimensionError("z_transform: weights do not match " + std::to_string(x.cols()) + " variables");
  }
  ZTransform out;
  out.mu = matmul(x, a_mu);
  Var centered = sub_col(x, out.mu);
  out.s = sqrt(matmul(square(centered), a_s));
  out.z = mul_col(centered, reciprocal(add_scalar(out.s, epsilon)));
  return out;
}

ZTransform z_transform(Tape& tape, Var x, const CovarianceContext& cov, Var w_mu, Var w_s, double epsilon) {
  return z_transform(x, mixing_weights(tape, cov.sigma, w_mu), mixing_weights(tape, cov.sigma, w_s), epsilon);
}

Var js_matrix(Var z_fwd, Var z_bwd) { return jensen_shannon_rows(softmax_rows(z_fwd), softmax_rows(z_bwd)); }

JsaScores jsa_forward(Tape& tape, const DiffTriple& triple, const CovarianceContext& cov, const JsaParams& params,
                      double epsilon) {
  JsaScores s;
  s.a_mu = mixing_weights(tape, cov.sigma, params.w_mu);
  s.a_s = mixing_weights(tape, cov.sigma, params.w_s);
  s.z_fwd = z_transform(tape.constant(triple.d_fwd), s.a_mu, s.a_s, epsilon).z;
  s.z_bwd = z_transform(tape.constant(triple.d_bwd), s.a_mu, s.a_s, epsilon).z;
  s.p_fwd = softmax_rows(s.z_fwd);
  s.p_bwd = softmax_rows(s.z_bwd);
  s.j = jensen_shannon_rows(s.p_fwd, s.p_bwd);
  Var v_f = matmul(s.z_fwd, params.w_vf);
  Var v_b = matmul(s.z_bwd, params.w_vb);
  s.output = add(matmul(s.j, v_f), matmul(transpose(s.j), v_b));
  return s;
}

}  // namespace draformer
