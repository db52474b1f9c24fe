#include "draformer/encoder.hpp"

#include "draformer/errors.hpp"

namespace draformer {

WindowFeatures prepare_features(const Matrix& x, double lambda) {
  WindowFeatures f;
  f.triple = difference(x);
  f.cov = estimate_covariance(f.triple.d_fwd, f.triple.d_bwd, lambda);
  f.md2 = mahalanobis_sq(f.triple, f.cov);
  return f;
}

void EncoderLayerParams::declare(ParamStore& store, const std::string& prefix, Index n_vars, Index d_model,
                                 Index d_ff, bool reconstructed, ParamInit& init) {
  if (reconstructed) {
    IdaParams::declare(store, prefix + "ida.", n_vars, d_model, init);
    JsaParams::declare(store, prefix + "jsa.", n_vars, d_model, init);
    store.add(prefix + "alpha_ida", Matrix::Constant(1, 1, kUnitSoftplusPreimage));
    store.add(prefix + "alpha_jsa", Matrix::Constant(1, 1, kUnitSoftplusPreimage));
  } else {
    MultiHeadParams::declare(store, prefix + "mha.", d_model, init);
  }
  FeedForwardParams::declare(store, prefix + "ffn.", d_model, d_ff, init);
  LayerNormParams::declare(store, prefix + "ln1.", d_model);
  LayerNormParams::declare(store, prefix + "ln2.", d_model);
}

EncoderLayerParams EncoderLayerParams::bind(Tape& tape, const ParamStore& store, const std::string& prefix,
                                            bool reconstructed) {
  EncoderLayerParams p;
  p.reconstructed = reconstructed;
  if (reconstructed) {
    p.ida = IdaParams::bind(tape, store, prefix + "ida.");
    p.jsa = JsaParams::bind(tape, store, prefix + "jsa.");
    p.alpha_ida = tape.param(store, prefix + "alpha_ida");
    p.alpha_jsa = tape.param(store, prefix + "alpha_jsa");
  } else {
    p.mha = MultiHeadParams::bind(tape, store, prefix + "mha.");
  }
  p.ffn = FeedForwardParams::bind(tape, store, prefix + "ffn.");
  p.ln1 = LayerNormParams::bind(tape, store, prefix + "ln1.");
  p.ln2 = LayerNormParams::bind(tape, store, prefix + "ln2.");
  return p;
}

Var encoder_layer(Tape& tape, Var x, const WindowFeatures& features, const EncoderLayerParams& params,
                  const EncoderOptions& options) {
  if (x.rows() != features.triple.raw.rows()) {
    throw DimensionError("encoder_layer: hidden state has " + std::to_string(x.rows()) + " rows, window has " +
                         std::to_string(features.triple.raw.rows()));
  }
  Var attended;
  if (params.reconstructed) {
    const IdaScores ida = ida_forward(tape, x, features.triple.raw, features.md2, params.ida, options.ida);
    const JsaScores jsa = jsa_forward(tape, features.triple, features.cov, params.jsa, options.epsilon);
    attended = add(scale_by(ida.output, softplus(params.alpha_ida)),
                   scale_by(jsa.output, softplus(params.alpha_jsa)));
  } else {
    attended = multi_head_attention(x, x, params.mha, options.n_heads);
  }
  Var h = layer_norm(add(x, attended), params.ln1);
  return layer_norm(add(h, feed_forward(h, params.ffn)), params.ln2);
}

Var encode(Tape& tape, Var x, const WindowFeatures& features, const std::vector<EncoderLayerParams>& layers,
           const EncoderOptions& options) {
  if (layers.empty()) throw ConfigError("encode: at least one encoder layer is required");
  Var h = x;
  for (const auto& layer : layers) h = encoder_layer(tape, h, features, layer, options);
  return h;
}

}  // namespace draformer
