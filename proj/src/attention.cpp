#include "draformer/attention.hpp"

#include "draformer/errors.hpp"

#include <cmath>
#include <vector>

namespace draformer {

void MultiHeadParams::declare(ParamStore& store, const std::string& prefix, Index d_model, ParamInit& init) {
  for (const char* name : {"w_q", "w_k", "w_v", "w_o"}) {
    store.add(prefix + name, init.uniform_fan_in(d_model, d_model));
  }
}

MultiHeadParams MultiHeadParams::bind(Tape& tape, const ParamStore& store, const std::string& prefix) {
  return MultiHeadParams{tape.param(store, prefix + "w_q"), tape.param(store, prefix + "w_k"),
                         tape.param(store, prefix + "w_v"), tape.param(store, prefix + "w_o")};
}

Var multi_head_attention(Var queries, Var keys_values, const MultiHeadParams& params, Index n_heads, bool causal) {
  const Index d_model = queries.cols();
  if (keys_values.cols() != d_model) {
    throw DimensionError("multi_head_attention: query width " + std::to_string(d_model) + " vs key width " +
                         std::to_string(keys_values.cols()));
  }
  if (n_heads < 1 || d_model % n_heads != 0) {
    throw DimensionError("multi_head_attention: " + std::to_string(n_heads) + " heads do not divide d_model " +
                         std::to_string(d_model));
  }
  const Index d_head = d_model / n_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(d_head));
  Var q = matmul(queries, params.w_q);
  Var k = matmul(keys_values, params.w_k);
  Var v = matmul(keys_values, params.w_v);
  std::vector<Var> heads;
  heads.reserve(static_cast<std::size_t>(n_heads));
  for (Index h = 0; h < n_heads; ++h) {
    Var qh = slice_cols(q, h * d_head, d_head);
    Var kh = slice_cols(k, h * d_head, d_head);
    Var vh = slice_cols(v, h * d_head, d_head);
    Var scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
    Var weights = causal ? softmax_rows_causal(scores) : softmax_rows(scores);
    heads.push_back(matmul(weights, vh));
  }
  Var merged = n_heads == 1 ? heads.front() : concat_cols(heads);
  return matmul(merged, params.w_o);
}

void FeedForwardParams::declare(ParamStore& store, const std::string& prefix, Index d_model, Index d_ff,
                                ParamInit& init) {
  store.add(prefix + "w1", init.uniform_fan_in(d_model, d_ff));
  store.add(prefix + "b1", Matrix::Zero(1, d_ff));
  store.add(prefix + "w2", init.uniform_fan_in(d_ff, d_model));
  store.add(prefix + "b2", Matrix::Zero(1, d_model));
}

FeedForwardParams FeedForwardParams::bind(Tape& tape, const ParamStore& store, const std::string& prefix) {
  return FeedForwardParams{tape.param(store, prefix + "w1"), tape.param(store, prefix + "b1"),
                           tape.param(store, prefix + "w2"), tape.param(store, prefix + "b2")};
}

Var feed_forward(Var x, const FeedForwardParams& p) {
  return add_row(matmul(elu(add_row(matmul(x, p.w1), p.b1)), p.w2), p.b2);
}

void LayerNormParams::declare(ParamStore& store, const std::string& prefix, Index d_model) {
  store.add(prefix + "gain", Matrix::Ones(1, d_model));
  store.add(prefix + "bias", Matrix::Zero(1, d_model));
}

LayerNormParams LayerNormParams::bind(Tape& tape, const ParamStore& store, const std::string& prefix) {
  return LayerNormParams{tape.param(store, prefix + "gain"), tape.param(store, prefix + "bias")};
}

}  // namespace draformer
