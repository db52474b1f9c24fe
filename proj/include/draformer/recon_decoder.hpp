#pragma once

// Reconstructed decoder input and the one-shot generative decoder.
//
// The embedded triple (X_f, X, X_b) is interleaved into a 3L x d_model
// sequence g. Two feature extractors read it: time distillation (stride-3
// convolution, ELU, max-pool over channel groups) and dimension convergence
// (a per-step weighted sum of the triple gated by the sigmoid of the previous
// step). Their fusion fills the first L_x decoder rows; the last L_y rows are
// zero placeholders, so the whole horizon is produced by one decoder pass.

#include "draformer/attention.hpp"
#include "draformer/series.hpp"

#include <string>
#include <vector>

namespace draformer {

/// Output channels of the distillation convolution: d_model when k divides
/// d_model (pooled down to k), otherwise k (pooling is the identity).
Index distill_channels(Index d_model, Index k);

struct ReconParams {
  Var w_g;     // 3 x 1
  Var conv_w;  // 3 d_model x channels
  Var conv_b;  // 1 x channels
  Var w_c;     // (k + d_model) x d_model

  static void declare(ParamStore& store, Index d_model, Index k, ParamInit& init);
  static ReconParams bind(Tape& tape, const ParamStore& store);
};

struct ReconSequence {
  Var g;       // 3 L_x x d_model, rows (X_f^t, X^t, X_b^t) in time order
  Var t_feat;  // L_x x k
  Var d_feat;  // L_x x d_model
  Var x_reg;   // L_x x d_model
  Var x_rec;   // (L_x + L_y) x d_model
};

Var build_triple_stack(const EmbeddedTriple& embedded);

/// Maxpool(ELU(Conv1d(g))) with kernel 3 and stride 3: one output per time step.
Var time_distill(Var g, Var conv_w, Var conv_b, Index k);

/// e_t = w_g . (X_f^t, X^t, X_b^t); d_t = e_t * sigmoid(e_{t-1}) with e_0 = 0.
Var dimension_converge(Var g, Var w_g);

/// x_reg = [t_feat, d_feat] w_c followed by pred_len zero rows.
ReconSequence fuse_and_pad(Tape& tape, Var t_feat, Var d_feat, Var w_c, Index pred_len);

ReconSequence reconstruct(Tape& tape, const EmbeddedTriple& embedded, const ReconParams& params, Index k,
                          Index pred_len);

/// Ablation B: zero rows over the full input-plus-horizon span.
ReconSequence placeholder_sequence(Tape& tape, Index input_len, Index pred_len, Index d_model);

struct DecoderLayerParams {
  MultiHeadParams self_attn;
  MultiHeadParams cross_attn;
  FeedForwardParams ffn;
  LayerNormParams ln1, ln2, ln3;

  static void declare(ParamStore& store, const std::string& prefix, Index d_model, Index d_ff, ParamInit& init);
  static DecoderLayerParams bind(Tape& tape, const ParamStore& store, const std::string& prefix);
};

struct DecoderParams {
  Var pos;  // (L_x + L_y) x d_model learned positions
  std::vector<DecoderLayerParams> layers;
  Var out_w;  // d_model x N_y
  Var out_b;  // 1 x N_y

  static void declare(ParamStore& store, Index rows, Index d_model, Index d_ff, Index n_layers, Index n_out,
                      ParamInit& init);
  static DecoderParams bind(Tape& tape, const ParamStore& store, Index n_layers);
};

/// LN(h + causal self-attention(h)): the part of a decoder layer that runs
/// before cross-attention.
Var decoder_self_block(Var h, const DecoderLayerParams& params, Index n_heads);

Var decoder_layer(Var h, Var encoder_out, const DecoderLayerParams& params, Index n_heads);

/// Runs the decoder over x_rec + positions and projects the last pred_len
/// rows to pred_len x N_y predictions.
Var decode(Var x_rec, Var encoder_out, const DecoderParams& params, Index n_heads, Index pred_len);

}  // namespace draformer
