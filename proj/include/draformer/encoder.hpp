#pragma once

#include "draformer/attention.hpp"
#include "draformer/ida.hpp"
#include "draformer/jsa.hpp"
#include "draformer/series.hpp"

#include <string>
#include <vector>

namespace draformer {

/// Data-derived inputs shared by every encoder layer of one window. None of
/// these depend on learnable parameters.
struct WindowFeatures {
  DiffTriple triple;
  CovarianceContext cov;
  Matrix md2;
};

WindowFeatures prepare_features(const Matrix& x, double lambda);

/// softplus(alpha) = 1 at this pre-activation.
inline constexpr double kUnitSoftplusPreimage = 0.54132485461291810;

struct EncoderLayerParams {
  bool reconstructed = true;
  IdaParams ida;
  JsaParams jsa;
  Var alpha_ida;
  Var alpha_jsa;
  MultiHeadParams mha;
  FeedForwardParams ffn;
  LayerNormParams ln1;
  LayerNormParams ln2;

  static void declare(ParamStore& store, const std::string& prefix, Index n_vars, Index d_model, Index d_ff,
                      bool reconstructed, ParamInit& init);
  static EncoderLayerParams bind(Tape& tape, const ParamStore& store, const std::string& prefix,
                                 bool reconstructed);
};

struct EncoderOptions {
  Index n_heads = 8;
  double epsilon = 1e-3;
  IdaOptions ida;
};

/// a = softplus(alpha_ida) IDA + softplus(alpha_jsa) JSA (or multi-head
/// self-attention for the ablated layer); h = LN(x + a); out = LN(h + FFN(h)).
Var encoder_layer(Tape& tape, Var x, const WindowFeatures& features, const EncoderLayerParams& params,
                  const EncoderOptions& options = {});

/// Applies the layers in order. Attention distances always come from the
/// window's data, only values flow through the hidden state.
Var encode(Tape& tape, Var x, const WindowFeatures& features, const std::vector<EncoderLayerParams>& layers,
           const EncoderOptions& options = {});

}  // namespace draformer
