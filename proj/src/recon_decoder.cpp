#include "draformer/recon_decoder.hpp"

#include "draformer/errors.hpp"

#include <cmath>

namespace draformer {

Index distill_channels(Index d_model, Index k) {
  if (k < 1 || k > d_model) {
    throw ConfigError("time distillation needs 1 <= k <= d_model, got k=" + std::to_string(k) +
                      " with d_model=" + std::to_string(d_model));
  }
  return d_model % k == 0 ? d_model : k;
}

void ReconParams::declare(ParamStore& store, Index d_model, Index k, ParamInit& init) {
  const Index channels = distill_channels(d_model, k);
  store.add("recon.w_g", init.uniform_fan_in(3, 1));
  store.add("recon.conv_w", init.uniform_fan_in(3 * d_model, channels));
  store.add("recon.conv_b", Matrix::Zero(1, channels));
  store.add("recon.w_c", init.uniform_fan_in(k + d_model, d_model));
}

ReconParams ReconParams::bind(Tape& tape, const ParamStore& store) {
  return ReconParams{tape.param(store, "recon.w_g"), tape.param(store, "recon.conv_w"),
                     tape.param(store, "recon.conv_b"), tape.param(store, "recon.w_c")};
}

Var build_triple_stack(const EmbeddedTriple& e) {
  const Index L = e.ex_raw.rows();
  const Index d = e.ex_raw.cols();
  for (Var v : {e.ex_fwd, e.ex_bwd}) {
    if (v.rows() != L || v.cols() != d) {
      throw DimensionError("build_triple_stack: embeddings " + shape_string(v.value()) + " and " +
                           shape_string(e.ex_raw.value()) + " differ");
    }
  }
  // Row t of [X_f, X, X_b] laid out row-major is exactly g_{3t}, g_{3t+1}, g_{3t+2}.
  return reshape(concat_cols({e.ex_fwd, e.ex_raw, e.ex_bwd}), 3 * L, d);
}

Var time_distill(Var g, Var conv_w, Var conv_b, Index k) {
  const Index d = g.cols();
  const Index channels = distill_channels(d, k);
  if (conv_w.cols() != channels) {
    throw DimensionError("time_distill: kernel has " + std::to_string(conv_w.cols()) + " channels, expected " +
                         std::to_string(channels));
  }
  Var activated = elu(add_row(conv1d(g, conv_w, 3, 3), conv_b));
  return channels == k ? activated : maxpool_cols(activated, channels / k);
}

Var dimension_converge(Var g, Var w_g) {
  if (w_g.rows() != 3 || w_g.cols() != 1) {
    throw DimensionError("dimension_converge: w_g must be 3x1, got " + shape_string(w_g.value()));
  }
  if (g.rows() % 3 != 0) throw DimensionError("dimension_converge: stacked rows must be a multiple of 3");
  Tape& tape = *g.tape();
  const Index L = g.rows() / 3;
  const Index d = g.cols();
  Var rows = reshape(g, L, 3 * d);
  Var e = scale_by(slice_cols(rows, 0, d), slice_rows(w_g, 0, 1));
  e = add(e, scale_by(slice_cols(rows, d, d), slice_rows(w_g, 1, 1)));
  e = add(e, scale_by(slice_cols(rows, 2 * d, d), slice_rows(w_g, 2, 1)));
  Var previous = tape.constant(Matrix::Zero(1, d));
  if (L > 1) previous = concat_rows({previous, slice_rows(e, 0, L - 1)});
  return mul(e, sigmoid(previous));
}

ReconSequence fuse_and_pad(Tape& tape, Var t_feat, Var d_feat, Var w_c, Index pred_len) {
  if (t_feat.rows() != d_feat.rows()) {
    throw DimensionError("fuse_and_pad: feature lengths " + shape_string(t_feat.value()) + " and " +
                         shape_string(d_feat.value()) + " differ");
  }
  if (w_c.rows() != t_feat.cols() + d_feat.cols()) {
    throw DimensionError("fuse_and_pad: fusion matrix " + shape_string(w_c.value()) + " does not accept " +
                         std::to_string(t_feat.cols() + d_feat.cols()) + " features");
  }
  ReconSequence s;
  s.t_feat = t_feat;
  s.d_feat = d_feat;
  s.x_reg = matmul(concat_cols({t_feat, d_feat}), w_c);
  s.x_rec = concat_rows({s.x_reg, tape.constant(Matrix::Zero(pred_len, w_c.cols()))});
  return s;
}

ReconSequence reconstruct(Tape& tape, const EmbeddedTriple& embedded, const ReconParams& params, Index k,
                          Index pred_len) {
  Var g = build_triple_stack(embedded);
  ReconSequence s = fuse_and_pad(tape, time_distill(g, params.conv_w, params.conv_b, k),
                                 dimension_converge(g, params.w_g), params.w_c, pred_len);
  s.g = g;
  return s;
}

ReconSequence placeholder_sequence(Tape& tape, Index input_len, Index pred_len, Index d_model) {
  ReconSequence s;
  s.x_rec = tape.constant(Matrix::Zero(input_len + pred_len, d_model));
  return s;
}

void DecoderLayerParams::declare(ParamStore& store, const std::string& prefix, Index d_model, Index d_ff,
                                 ParamInit& init) {
  MultiHeadParams::declare(store, prefix + "self.", d_model, init);
  MultiHeadParams::declare(store, prefix + "cross.", d_model, init);
  FeedForwardParams::declare(store, prefix + "ffn.", d_model, d_ff, init);
  LayerNormParams::declare(store, prefix + "ln1.", d_model);
  LayerNormParams::declare(store, prefix + "ln2.", d_model);
  LayerNormParams::declare(store, prefix + "ln3.", d_model);
}

DecoderLayerParams DecoderLayerParams::bind(Tape& tape, const ParamStore& store, const std::string& prefix) {
  DecoderLayerParams p;
  p.self_attn = MultiHeadParams::bind(tape, store, prefix + "self.");
  p.cross_attn = MultiHeadParams::bind(tape, store, prefix + "cross.");
  p.ffn = FeedForwardParams::bind(tape, store, prefix + "ffn.");
  p.ln1 = LayerNormParams::bind(tape, store, prefix + "ln1.");
  p.ln2 = LayerNormParams::bind(tape, store, prefix + "ln2.");
  p.ln3 = LayerNormParams::bind(tape, store, prefix + "ln3.");
  return p;
}

void DecoderParams::declare(ParamStore& store, Index rows, Index d_model, Index d_ff, Index n_layers, Index n_out,
                            ParamInit& init) {
  store.add("dec.pos", init.uniform(rows, d_model, 1.0 / std::sqrt(static_cast<double>(d_model))));
  for (Index l = 0; l < n_layers; ++l) {
    DecoderLayerParams::declare(store, "dec." + std::to_string(l) + ".", d_model, d_ff, init);
  }
  store.add("out.w", init.uniform_fan_in(d_model, n_out));
  store.add("out.b", Matrix::Zero(1, n_out));
}

DecoderParams DecoderParams::bind(Tape& tape, const ParamStore& store, Index n_layers) {
  DecoderParams p;
  p.pos = tape.param(store, "dec.pos");
  for (Index l = 0; l < n_layers; ++l) {
    p.layers.push_back(DecoderLayerParams::bind(tape, store, "dec." + std::to_string(l) + "."));
  }
  p.out_w = tape.param(store, "out.w");
  p.out_b = tape.param(store, "out.b");
  return p;
}

Var decoder_self_block(Var h, const DecoderLayerParams& p, Index n_heads) {
  return layer_norm(add(h, multi_head_attention(h, h, p.self_attn, n_heads, true)), p.ln1);
}

Var decoder_layer(Var h, Var encoder_out, const DecoderLayerParams& p, Index n_heads) {
  Var a = decoder_self_block(h, p, n_heads);
  Var b = layer_norm(add(a, multi_head_attention(a, encoder_out, p.cross_attn, n_heads)), p.ln2);
  return layer_norm(add(b, feed_forward(b, p.ffn)), p.ln3);
}

Var decode(Var x_rec, Var encoder_out, const DecoderParams& params, Index n_heads, Index pred_len) {
  if (params.pos.rows() != x_rec.rows() || params.pos.cols() != x_rec.cols()) {
    throw DimensionError("decode: positions " + shape_string(params.pos.value()) + " vs decoder input " +
                         shape_string(x_rec.value()));
  }
  if (pred_len < 1 || pred_len > x_rec.rows()) throw DimensionError("decode: invalid horizon");
  Var h = add(x_rec, params.pos);
  for (const auto& layer : params.layers) h = decoder_layer(h, encoder_out, layer, n_heads);
  Var tail = slice_rows(h, h.rows() - pred_len, pred_len);
  return add_row(matmul(tail, params.out_w), params.out_b);
}

}  // namespace draformer
