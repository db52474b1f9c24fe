#include "draformer/ida.hpp"

#include <cmath>
#include <numbers>

namespace draformer {

void IdaParams::declare(ParamStore& store, const std::string& prefix, Index n_vars, Index d_model,
                        ParamInit& init) {
  store.add(prefix + "w_sigma", init.uniform_fan_in(n_vars, 1));
  store.add(prefix + "w_v", init.uniform_fan_in(d_model, d_model));
}

IdaParams IdaParams::bind(Tape& tape, const ParamStore& store, const std::string& prefix) {
  return IdaParams{tape.param(store, prefix + "w_sigma"), tape.param(store, prefix + "w_v")};
}

Var sigma_vector(Tape& tape, const Matrix& x_raw, Var w_sigma, double sigma_floor) {
  if (w_sigma.rows() != x_raw.cols() || w_sigma.cols() != 1) {
    throw DimensionError("sigma_vector: w_sigma " + shape_string(w_sigma.value()) + " does not map " +
                         std::to_string(x_raw.cols()) + " variables");
  }
  return add_scalar(softplus(matmul(tape.constant(x_raw), w_sigma)), sigma_floor);
}

Matrix temporal_distance_sq(Index length) {
  Matrix t(length, length);
  for (Index i = 0; i < length; ++i) {
    for (Index j = 0; j < length; ++j) {
      const auto d = static_cast<double>(i - j);
      t(i, j) = d * d;
    }
  }
  return t;
}

IdaScores ida_forward(Tape& tape, Var x_embedded, const Matrix& x_raw, const Matrix& md2, const IdaParams& params,
                      const IdaOptions& options) {
  const Index L = x_raw.rows();
  if (md2.rows() != L || md2.cols() != L || x_embedded.rows() != L) {
    throw DimensionError("ida_forward: window of " + std::to_string(L) + " rows with md2 " + shape_string(md2) +
                         " and embedding " + shape_string(x_embedded.value()));
  }
  IdaScores s;
  s.md2 = md2;
  s.sigma = sigma_vector(tape, x_raw, params.w_sigma, options.sigma_floor);

  // exp(-|i-j|^2 md2(i,j) / (2 sigma_i^2)), optionally times 1/(sqrt(2 pi) sigma_i).
  Var distance = tape.constant(temporal_distance_sq(L).cwiseProduct(md2));
  Var inv_two_var = scale(reciprocal(square(s.sigma)), 0.5);
  Var gauss = exp(scale(mul_col(distance, inv_two_var), -1.0));
  if (options.gaussian_prefactor) {
    const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    s.kernel = mul_col(gauss, scale(reciprocal(s.sigma), c));
  } else {
    s.kernel = gauss;
  }
  s.weights = softmax_rows(s.kernel);
  Var values = matmul(x_embedded, params.w_v);
  s.output = matmul(s.weights, values);
  return s;
}

IdaScores ida_forward(Tape& tape, Var x_embedded, const DiffTriple& triple, const CovarianceContext& cov,
                      const IdaParams& params, const IdaOptions& options) {
  return ida_forward(tape, x_embedded, triple.raw, mahalanobis_sq(triple, cov), params, options);
}

}  // namespace draformer
