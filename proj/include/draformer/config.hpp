#pragma once

#include "draformer/tensor.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace draformer {

/// Hyperparameters of the model, the optimiser and the experiment protocol.
/// Defaults follow the published setup; desk-scale runs shrink d_model.
struct TrainConfig {
  Index input_len = 96;
  Index pred_len = 96;
  Index d_model = 512;
  /// Number of time-distillation features.
  Index k = 16;
  Index n_enc_layers = 2;
  Index n_dec_layers = 1;
  /// Feed-forward width; 0 selects 4 * d_model.
  Index d_ff = 0;
  /// Heads of every dot-product attention block (decoder and ablation A).
  Index n_heads = 8;
  Index batch_size = 32;
  Index epochs = 5;
  double lr0 = 5e-4;
  double lr_decay = 0.9;
  double lambda = 0.01;
  double epsilon = 1e-3;
  double grad_clip = 5.0;
  std::uint64_t seed = 42;
  Index train_stride = 1;
  /// Stride of validation/test windows; 0 selects pred_len (non-overlapping).
  Index eval_stride = 0;
  /// Ablation A: dot-product multi-head self-attention in place of IDA + JSA.
  bool replace_recon_attention = false;
  /// Ablation B: positional placeholders in place of the reconstructed decoder input.
  bool replace_recon_sequence = false;

  Index ffn_width() const { return d_ff > 0 ? d_ff : 4 * d_model; }
  Index effective_eval_stride() const { return eval_stride > 0 ? eval_stride : pred_len; }

  /// Throws ConfigError on invalid values; warns for univariate data and for
  /// both ablation toggles at once.
  void validate(Index n_vars = 0) const;

  /// Key/value echo used in reports and checkpoints.
  std::map<std::string, std::string> to_map() const;
  /// Applies known keys from the map; unknown keys raise ConfigError.
  static TrainConfig from_map(const std::map<std::string, std::string>& values);
};

}  // namespace draformer
