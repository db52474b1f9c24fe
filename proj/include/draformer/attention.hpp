#pragma once

#include "draformer/autodiff.hpp"
#include "draformer/params.hpp"

#include <string>

namespace draformer {

/// Scaled dot-product multi-head attention projections (bias-free).
struct MultiHeadParams {
  Var w_q, w_k, w_v, w_o;

  static void declare(ParamStore& store, const std::string& prefix, Index d_model, ParamInit& init);
  static MultiHeadParams bind(Tape& tape, const ParamStore& store, const std::string& prefix);
};

/// softmax(Q K^T / sqrt(d_head)) V per head, heads concatenated then projected.
/// With `causal`, query row i only sees key rows j <= i.
Var multi_head_attention(Var queries, Var keys_values, const MultiHeadParams& params, Index n_heads,
                         bool causal = false);

struct FeedForwardParams {
  Var w1, b1, w2, b2;

  static void declare(ParamStore& store, const std::string& prefix, Index d_model, Index d_ff, ParamInit& init);
  static FeedForwardParams bind(Tape& tape, const ParamStore& store, const std::string& prefix);
};

/// linear -> elu -> linear.
Var feed_forward(Var x, const FeedForwardParams& params);

struct LayerNormParams {
  Var gain, bias;

  static void declare(ParamStore& store, const std::string& prefix, Index d_model);
  static LayerNormParams bind(Tape& tape, const ParamStore& store, const std::string& prefix);
};

inline Var layer_norm(Var x, const LayerNormParams& p) { return layer_norm(x, p.gain, p.bias); }

}  // namespace draformer
