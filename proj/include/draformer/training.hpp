#pragma once

#include "draformer/model.hpp"

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace draformer {

// ---- optimisation ------------------------------------------------------

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  struct Slot {
    Matrix m;
    Matrix v;
  };
  std::map<std::string, Slot> slots;
  long step = 0;
};

/// One bias-corrected Adam update of every parameter present in `grads`.
void adam_step(ParamStore& params, const GradMap& grads, AdamState& state, double lr, const AdamHyper& hyper = {});

/// lr0 * decay^epoch.
double lr_schedule(Index epoch, double lr0, double decay);

/// Rescales all gradients so their joint L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_grad_norm(GradMap& grads, double max_norm);

/// Mean squared error over all entries.
double mse(const Matrix& pred, const Matrix& target);
double mae(const Matrix& pred, const Matrix& target);

/// Forward, backward, clipping and one Adam update on a mini-batch. Returns
/// the batch loss (mean of per-window MSE) before the update.
double train_step(DraModel& model, std::span<const Window> batch, AdamState& state, double lr);

// ---- evaluation --------------------------------------------------------

struct MetricsReport {
  double mae = 0.0;
  double mse = 0.0;
  /// Error per forecast step (index 0 is one step ahead).
  std::vector<double> step_mae;
  std::vector<double> step_mse;
  Index windows = 0;
  double runtime_seconds = 0.0;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
};

using Predictor = std::function<Matrix(const Matrix&)>;

/// Averages errors over every window, step and variable. Deterministic.
MetricsReport evaluate(const Predictor& predictor, const std::vector<Window>& windows);
MetricsReport evaluate(const DraModel& model, const std::vector<Window>& windows);

// ---- experiment protocol -----------------------------------------------

/// Chronological 6:2:2 split, z-scored with training-split statistics.
struct DataSplits {
  TimeSeriesFrame train;
  TimeSeriesFrame val;
  TimeSeriesFrame test;
  NormStats stats;
};

/// Throws InsufficientDataError naming the minimum length when any split is
/// shorter than input_len + pred_len.
DataSplits split_and_normalize(const TimeSeriesFrame& frame, const TrainConfig& config);
/// Same split, normalised with previously fitted statistics.
DataSplits split_and_normalize(const TimeSeriesFrame& frame, const TrainConfig& config, const NormStats& stats);

struct EpochRecord {
  Index epoch = 0;
  Index step = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_mse = 0.0;
};

struct TrainResult {
  DraModel model;
  std::vector<EpochRecord> log;
  double initial_train_loss = 0.0;
  /// Validation MSE of the returned (best) parameters.
  double best_val_mse = 0.0;
  Index best_epoch = -1;
};

/// Shuffled mini-batch training with per-epoch validation; returns the
/// parameters with the lowest validation MSE (the initial ones if epochs = 0).
TrainResult fit(const TrainConfig& config, Index n_vars, const std::vector<Window>& train_windows,
                const std::vector<Window>& val_windows);

struct Experiment {
  DataSplits splits;
  TrainResult result;
  MetricsReport test;
  MetricsReport baseline;
};

/// Full protocol on a raw frame: split, normalise, window, fit, test.
Experiment run_experiment(const TrainConfig& config, const TimeSeriesFrame& frame);

std::vector<Window> train_windows(const DataSplits& splits, const TrainConfig& config);
std::vector<Window> eval_windows(const TimeSeriesFrame& split, const TrainConfig& config);

// ---- ablation ----------------------------------------------------------

enum class Variant { full, no_recon_attention, no_recon_sequence };

std::string variant_name(Variant v);
/// The config with the variant's toggle applied.
TrainConfig ablate(const TrainConfig& config, Variant variant);

struct AblationRow {
  Variant variant = Variant::full;
  Index horizon = 0;
  double mae = 0.0;
  double mse = 0.0;
  std::size_t param_count = 0;
};

/// Trains full, -attention and -sequence variants for every horizon.
std::vector<AblationRow> run_ablation(const TrainConfig& config, const TimeSeriesFrame& frame,
                                      const std::vector<Index>& horizons);

}  // namespace draformer
