#pragma once

#include "draformer/config.hpp"
#include "draformer/encoder.hpp"
#include "draformer/recon_decoder.hpp"

#include <vector>

namespace draformer {

/// Full forecaster: embeddings, encoder stack, reconstructed decoder input
/// and decoder. Either reconstructed component can be swapped out through the
/// ablation flags of the config.
class DraModel {
 public:
  /// Fresh parameters initialised from config.seed.
  DraModel(TrainConfig config, Index n_vars);
  /// Adopts existing parameters; names and shapes must match the config.
  DraModel(TrainConfig config, Index n_vars, ParamStore params);

  struct Trace {
    WindowFeatures features;
    EmbeddedTriple embedded;
    Var encoder_out;
    ReconSequence recon;
    Var predictions;  // pred_len x n_vars
  };

  Trace forward_trace(Tape& tape, const Matrix& x) const;
  Var forward(Tape& tape, const Matrix& x) const { return forward_trace(tape, x).predictions; }
  /// Inference on one input window (input_len x n_vars).
  Matrix predict(const Matrix& x) const;

  const TrainConfig& config() const { return config_; }
  Index n_vars() const { return n_vars_; }
  const ParamStore& params() const { return params_; }
  ParamStore& params() { return params_; }

  /// Parameter layout (initialised) for a config without building a model.
  static ParamStore declare_params(const TrainConfig& config, Index n_vars);

 private:
  TrainConfig config_;
  Index n_vars_;
  ParamStore params_;
};

/// Prediction that repeats the last observed row over the horizon.
Matrix repeat_last(const Matrix& x, Index pred_len);

}  // namespace draformer
