#include "draformer/model.hpp"

#include "draformer/errors.hpp"

namespace draformer {

namespace {

std::string layer_prefix(const char* stack, Index l) { return std::string(stack) + std::to_string(l) + "."; }

}  // namespace

ParamStore DraModel::declare_params(const TrainConfig& c, Index n_vars) {
  c.validate(n_vars);
  ParamStore store;
  ParamInit init(c.seed);
  const Index d = c.d_model;
  if (!c.replace_recon_sequence) store.add("embed.w_f", init.uniform_fan_in(n_vars, d));
  store.add("embed.w_x", init.uniform_fan_in(n_vars, d));
  if (!c.replace_recon_sequence) store.add("embed.w_b", init.uniform_fan_in(n_vars, d));
  for (Index l = 0; l < c.n_enc_layers; ++l) {
    EncoderLayerParams::declare(store, layer_prefix("enc.", l), n_vars, d, c.ffn_width(), !c.replace_recon_attention,
                                init);
  }
  if (!c.replace_recon_sequence) ReconParams::declare(store, d, c.k, init);
  DecoderParams::declare(store, c.input_len + c.pred_len, d, c.ffn_width(), c.n_dec_layers, n_vars, init);
  return store;
}

DraModel::DraModel(TrainConfig config, Index n_vars)
    : config_(std::move(config)), n_vars_(n_vars), params_(declare_params(config_, n_vars)) {}

DraModel::DraModel(TrainConfig config, Index n_vars, ParamStore params)
    : config_(std::move(config)), n_vars_(n_vars), params_(std::move(params)) {
  const ParamStore expected = declare_params(config_, n_vars_);
  if (expected.names() != params_.names()) {
    throw ConfigError("parameter set does not match the model configuration");
  }
  for (const auto& name : expected.names()) {
    const Matrix& a = expected.get(name);
    const Matrix& b = params_.get(name);
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      throw DimensionError("parameter '" + name + "' has shape " + shape_string(b) + ", expected " +
                           shape_string(a));
    }
  }
}

DraModel::Trace DraModel::forward_trace(Tape& tape, const Matrix& x) const {
  const TrainConfig& c = config_;
  if (x.rows() != c.input_len || x.cols() != n_vars_) {
    throw DimensionError("model input must be " + shape_string(c.input_len, n_vars_) + ", got " + shape_string(x));
  }
  Trace tr;
  tr.features = prepare_features(x, c.lambda);

  Var w_x = tape.param(params_, "embed.w_x");
  tr.embedded.ex_raw = matmul(tape.constant(tr.features.triple.raw), w_x);
  if (!c.replace_recon_sequence) {
    tr.embedded.ex_fwd = matmul(tape.constant(tr.features.triple.d_fwd), tape.param(params_, "embed.w_f"));
    tr.embedded.ex_bwd = matmul(tape.constant(tr.features.triple.d_bwd), tape.param(params_, "embed.w_b"));
  }

  std::vector<EncoderLayerParams> layers;
  for (Index l = 0; l < c.n_enc_layers; ++l) {
    layers.push_back(EncoderLayerParams::bind(tape, params_, layer_prefix("enc.", l), !c.replace_recon_attention));
  }
  EncoderOptions opts;
  opts.n_heads = c.n_heads;
  opts.epsilon = c.epsilon;
  tr.encoder_out = encode(tape, tr.embedded.ex_raw, tr.features, layers, opts);

  if (c.replace_recon_sequence) {
    tr.recon = placeholder_sequence(tape, c.input_len, c.pred_len, c.d_model);
  } else {
    tr.recon = reconstruct(tape, tr.embedded, ReconParams::bind(tape, params_), c.k, c.pred_len);
  }
  const DecoderParams dec = DecoderParams::bind(tape, params_, c.n_dec_layers);
  tr.predictions = decode(tr.recon.x_rec, tr.encoder_out, dec, c.n_heads, c.pred_len);
  return tr;
}

Matrix DraModel::predict(const Matrix& x) const {
  Tape tape;
  return forward(tape, x).value();
}

Matrix repeat_last(const Matrix& x, Index pred_len) {
  if (x.rows() == 0) throw DataError("repeat_last: empty input window");
  return x.row(x.rows() - 1).replicate(pred_len, 1);
}

}  // namespace draformer
