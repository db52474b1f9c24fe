#include "draformer/training.hpp"

#include "draformer/errors.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace draformer {

void adam_step(ParamStore& params, const GradMap& grads, AdamState& state, double lr, const AdamHyper& hyper) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  for (const auto& [name, g] : grads) {
    Matrix& p = params.get_mut(name);
    if (p.rows() != g.rows() || p.cols() != g.cols()) {
      throw DimensionError("adam_step: gradient for '" + name + "' is " + shape_string(g) + ", parameter is " +
                           shape_string(p));
    }
    auto [it, inserted] = state.slots.try_emplace(name);
    AdamState::Slot& slot = it->second;
    if (inserted) {
      slot.m = Matrix::Zero(p.rows(), p.cols());
      slot.v = Matrix::Zero(p.rows(), p.cols());
    }
    slot.m = hyper.beta1 * slot.m + (1.0 - hyper.beta1) * g;
    slot.v = hyper.beta2 * slot.v + (1.0 - hyper.beta2) * g.cwiseAbs2();
    const auto m_hat = slot.m.array() / bc1;
    const auto v_hat = slot.v.array() / bc2;
    p.array() -= lr * m_hat / (v_hat.sqrt() + hyper.eps);
  }
}

double lr_schedule(Index epoch, double lr0, double decay) {
  if (epoch < 0) throw ConfigError("lr_schedule: epoch must be non-negative");
  return lr0 * std::pow(decay, static_cast<double>(epoch));
}

double clip_grad_norm(GradMap& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& [name, g] : grads) g *= s;
  }
  return norm;
}

double mse(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError("mse: shapes " + shape_string(pred) + " and " + shape_string(target) + " differ");
  }
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

double mae(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError("mae: shapes " + shape_string(pred) + " and " + shape_string(target) + " differ");
  }
  return (pred - target).cwiseAbs().sum() / static_cast<double>(pred.size());
}

double train_step(DraModel& model, std::span<const Window> batch, AdamState& state, double lr) {
  if (batch.empty()) throw DataError("train_step: empty batch");
  Tape tape;
  std::vector<Var> losses;
  losses.reserve(batch.size());
  for (const Window& w : batch) losses.push_back(mse_loss(model.forward(tape, w.x), w.y));
  Var total = losses.size() == 1 ? losses.front() : sum(concat_rows(losses));
  Var loss = scale(total, 1.0 / static_cast<double>(batch.size()));
  tape.backward(loss);
  GradMap grads = tape.param_grads(model.params());
  clip_grad_norm(grads, model.config().grad_clip);
  adam_step(model.params(), grads, state, lr);
  return loss.value()(0, 0);
}

MetricsReport evaluate(const Predictor& predictor, const std::vector<Window>& windows) {
  if (windows.empty()) throw EvaluationError("evaluate: no windows to evaluate");
  const auto start = std::chrono::steady_clock::now();
  MetricsReport r;
  const Index horizon = windows.front().y.rows();
  const Index n_vars = windows.front().y.cols();
  r.step_mae.assign(static_cast<std::size_t>(horizon), 0.0);
  r.step_mse.assign(static_cast<std::size_t>(horizon), 0.0);
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (const Window& w : windows) {
    const Matrix pred = predictor(w.x);
    if (pred.rows() != w.y.rows() || pred.cols() != w.y.cols()) {
      throw DimensionError("evaluate: prediction " + shape_string(pred) + " vs target " + shape_string(w.y));
    }
    const Matrix err = pred - w.y;
    for (Index t = 0; t < horizon; ++t) {
      const double a = err.row(t).cwiseAbs().sum();
      const double s = err.row(t).squaredNorm();
      r.step_mae[static_cast<std::size_t>(t)] += a;
      r.step_mse[static_cast<std::size_t>(t)] += s;
      abs_sum += a;
      sq_sum += s;
    }
  }
  const double per_step = static_cast<double>(windows.size()) * static_cast<double>(n_vars);
  for (std::size_t t = 0; t < r.step_mae.size(); ++t) {
    r.step_mae[t] /= per_step;
    r.step_mse[t] /= per_step;
  }
  const double total = per_step * static_cast<double>(horizon);
  r.mae = abs_sum / total;
  r.mse = sq_sum / total;
  r.windows = static_cast<Index>(windows.size());
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

MetricsReport evaluate(const DraModel& model, const std::vector<Window>& windows) {
  MetricsReport r = evaluate([&model](const Matrix& x) { return model.predict(x); }, windows);
  r.config = model.config().to_map();
  r.seed = model.config().seed;
  return r;
}

namespace {

DataSplits split_with(const TimeSeriesFrame& frame, const TrainConfig& config, const NormStats* stats) {
  const Index needed = config.input_len + config.pred_len;
  const Index len = frame.length();
  const Index n_train = len * 6 / 10;
  const Index n_val = len * 2 / 10;
  const Index n_test = len - n_train - n_val;
  if (n_val < needed || n_test < needed || n_train < needed) {
    // The smallest split gets a fifth of the rows, rounded down.
    const Index minimum = 5 * needed;
    throw InsufficientDataError("dataset has " + std::to_string(len) + " rows; a 6:2:2 split with windows of " +
                                std::to_string(needed) + " rows needs at least " + std::to_string(minimum));
  }
  DataSplits s;
  const TimeSeriesFrame raw_train = frame.slice(0, n_train);
  s.stats = stats ? *stats : fit_normalization(raw_train.values, frame.names);
  if (s.stats.mean.size() != frame.variables() || s.stats.scale.size() != frame.variables()) {
    throw DimensionError("normalisation statistics cover " + std::to_string(s.stats.mean.size()) +
                         " variables, data has " + std::to_string(frame.variables()));
  }
  s.train = normalize(raw_train, s.stats);
  s.val = normalize(frame.slice(n_train, n_val), s.stats);
  s.test = normalize(frame.slice(n_train + n_val, n_test), s.stats);
  return s;
}

}  // namespace

DataSplits split_and_normalize(const TimeSeriesFrame& frame, const TrainConfig& config) {
  return split_with(frame, config, nullptr);
}

DataSplits split_and_normalize(const TimeSeriesFrame& frame, const TrainConfig& config, const NormStats& stats) {
  return split_with(frame, config, &stats);
}

std::vector<Window> train_windows(const DataSplits& splits, const TrainConfig& config) {
  return make_windows(splits.train.values, config.input_len, config.pred_len, config.train_stride);
}

std::vector<Window> eval_windows(const TimeSeriesFrame& split, const TrainConfig& config) {
  return make_windows(split.values, config.input_len, config.pred_len, config.effective_eval_stride());
}

namespace {

double mean_loss(const DraModel& model, const std::vector<Window>& windows) {
  double total = 0.0;
  for (const Window& w : windows) total += mse(model.predict(w.x), w.y);
  return total / static_cast<double>(windows.size());
}

}  // namespace

TrainResult fit(const TrainConfig& config, Index n_vars, const std::vector<Window>& train_set,
                const std::vector<Window>& val_set) {
  if (train_set.empty()) throw InsufficientDataError("fit: no training windows");
  if (val_set.empty()) throw InsufficientDataError("fit: no validation windows");
  DraModel model(config, n_vars);
  TrainResult result{model, {}, 0.0, 0.0, -1};
  result.initial_train_loss = mean_loss(model, train_set);
  result.best_val_mse = evaluate(model, val_set).mse;

  AdamState state;
  std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Window> batch;
  Index step = 0;
  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, config.lr0, config.lr_decay);
    // Fisher-Yates with raw engine draws: reproducible across standard libraries.
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double loss_sum = 0.0;
    Index batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(train_set[order[i]]);
      loss_sum += train_step(model, batch, state, lr);
      ++batches;
      ++step;
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.step = step;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.val_mse = evaluate(model, val_set).mse;
    result.log.push_back(rec);
    if (result.best_epoch < 0 || rec.val_mse < result.best_val_mse) {
      result.best_val_mse = rec.val_mse;
      result.best_epoch = rec.epoch;
      result.model.params() = model.params();
    }
  }
  return result;
}

Experiment run_experiment(const TrainConfig& config, const TimeSeriesFrame& frame) {
  config.validate(frame.variables());
  Experiment e{split_and_normalize(frame, config), TrainResult{DraModel(config, frame.variables()), {}, 0, 0, -1},
               {}, {}};
  const std::vector<Window> tr = train_windows(e.splits, config);
  const std::vector<Window> va = eval_windows(e.splits.val, config);
  const std::vector<Window> te = eval_windows(e.splits.test, config);
  e.result = fit(config, frame.variables(), tr, va);
  e.test = evaluate(e.result.model, te);
  const Index horizon = config.pred_len;
  e.baseline = evaluate([horizon](const Matrix& x) { return repeat_last(x, horizon); }, te);
  return e;
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::no_recon_attention: return "-attention";
    case Variant::no_recon_sequence: return "-sequence";
  }
  return "?";
}

TrainConfig ablate(const TrainConfig& config, Variant variant) {
  TrainConfig c = config;
  c.replace_recon_attention = false;
  c.replace_recon_sequence = false;
  if (variant == Variant::no_recon_attention) c.replace_recon_attention = true;
  if (variant == Variant::no_recon_sequence) c.replace_recon_sequence = true;
  return c;
}

std::vector<AblationRow> run_ablation(const TrainConfig& config, const TimeSeriesFrame& frame,
                                      const std::vector<Index>& horizons) {
  if (horizons.empty()) throw ConfigError("run_ablation: no horizons given");
  std::vector<AblationRow> rows;
  for (Variant v : {Variant::full, Variant::no_recon_attention, Variant::no_recon_sequence}) {
    for (Index h : horizons) {
      TrainConfig c = ablate(config, v);
      c.pred_len = h;
      const Experiment e = run_experiment(c, frame);
      rows.push_back(AblationRow{v, h, e.test.mae, e.test.mse, e.result.model.params().scalar_count()});
    }
  }
  return rows;
}

}  // namespace draformer
