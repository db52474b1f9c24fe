// Command-line front end: train, evaluate, predict, ablate, gradcheck, plot.
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include "draformer/checkpoint.hpp"
#include "draformer/errors.hpp"
#include "draformer/gradient_suite.hpp"
#include "draformer/run_config.hpp"
#include "draformer/svg_plot.hpp"
#include "draformer/training.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>

namespace fs = std::filesystem;
using namespace draformer;

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;

  void attach(CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "run configuration file (key = value)");
    sub->add_option("--set", sets, "override any configuration key: --set key=value")->take_all();
    for (const auto& [flag, key] : std::vector<std::pair<std::string, std::string>>{
             {"--data", "data"}, {"--preset", "preset"}, {"--output-dir", "output_dir"},
             {"--checkpoint", "checkpoint"}, {"--epochs", "epochs"}, {"--seed", "seed"}, {"--split", "split"},
             {"--window", "window"}, {"--variable", "variable"}, {"--horizons", "horizons"},
             {"--max-rows", "max_rows"}}) {
      sub->add_option_function<std::string>(flag, [this, key = key](const std::string& v) { flags[key] = v; },
                                            "sets configuration key '" + key + "'");
    }
  }

  RunConfig resolve() const {
    KeyValues overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
      overrides[s.substr(0, eq)] = s.substr(eq + 1);
    }
    for (const auto& [k, v] : flags) overrides[k] = v;
    try {
      return load_run_config(config_path, overrides);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
};

TimeSeriesFrame load_dataset(const RunConfig& rc) {
  if (rc.data.empty()) throw UsageError("no dataset: set 'data' to a CSV path or 'synthetic'");
  if (rc.data == "synthetic") return sinusoid_ar_series(rc.synthetic);
  return load_csv(rc.data, rc.csv);
}

const TimeSeriesFrame& pick_split(const DataSplits& s, const std::string& name) {
  if (name == "train") return s.train;
  if (name == "val") return s.val;
  return s.test;
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

struct Loaded {
  Checkpoint ckpt;
  DraModel model;
  DataSplits splits;
};

Loaded load_model_and_data(const RunConfig& rc) {
  Checkpoint ckpt = load_checkpoint(rc.checkpoint_path());
  const TimeSeriesFrame frame = load_dataset(rc);
  if (frame.variables() != ckpt.n_vars) {
    throw DataError("checkpoint expects " + std::to_string(ckpt.n_vars) + " variables, data has " +
                    std::to_string(frame.variables()));
  }
  DataSplits splits = ckpt.stats ? split_and_normalize(frame, ckpt.config, *ckpt.stats)
                                 : split_and_normalize(frame, ckpt.config);
  DraModel model(ckpt.config, ckpt.n_vars, ckpt.params);
  return Loaded{std::move(ckpt), std::move(model), std::move(splits)};
}

int cmd_train(const RunConfig& rc) {
  const auto start = std::chrono::steady_clock::now();
  const TimeSeriesFrame frame = load_dataset(rc);
  rc.train.validate(frame.variables());
  const DataSplits splits = split_and_normalize(frame, rc.train);
  const TrainResult result =
      fit(rc.train, frame.variables(), train_windows(splits, rc.train), eval_windows(splits.val, rc.train));
  const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ensure_dir(rc.output_dir);
  Checkpoint ckpt;
  ckpt.config = rc.train;
  ckpt.n_vars = frame.variables();
  ckpt.variables = frame.names;
  ckpt.stats = splits.stats;
  ckpt.params = result.model.params();
  ckpt.best_epoch = result.best_epoch;
  ckpt.best_val_mse = result.best_val_mse;
  const std::string ckpt_path = rc.checkpoint_path();
  if (const auto parent = fs::path(ckpt_path).parent_path(); !parent.empty()) fs::create_directories(parent);
  save_checkpoint(ckpt_path, ckpt);

  std::ofstream log(rc.output_dir + "/train_log.jsonl");
  for (const EpochRecord& r : result.log) {
    log << nlohmann::json{{"epoch", r.epoch}, {"step", r.step}, {"lr", r.lr}, {"train_loss", r.train_loss},
                          {"val_mse", r.val_mse}}
               .dump()
        << '\n';
  }
  log << nlohmann::json{{"final", true},
                        {"best_epoch", result.best_epoch},
                        {"val_mse", result.best_val_mse},
                        {"initial_train_loss", result.initial_train_loss},
                        {"epochs", rc.train.epochs},
                        {"runtime_seconds", runtime}}
             .dump()
      << '\n';

  for (const EpochRecord& r : result.log) {
    std::cout << "epoch " << r.epoch << "  lr " << r.lr << "  train_loss " << r.train_loss << "  val_mse "
              << r.val_mse << '\n';
  }
  std::cout << "best epoch " << result.best_epoch << " (val_mse " << result.best_val_mse << "); checkpoint "
            << ckpt_path << '\n';
  return 0;
}

int cmd_evaluate(const RunConfig& rc) {
  const Loaded l = load_model_and_data(rc);
  const std::vector<Window> windows = eval_windows(pick_split(l.splits, rc.split), l.ckpt.config);
  const MetricsReport m = evaluate(l.model, windows);
  const Index horizon = l.ckpt.config.pred_len;
  const MetricsReport b = evaluate([horizon](const Matrix& x) { return repeat_last(x, horizon); }, windows);

  ensure_dir(rc.output_dir);
  std::ofstream csv(rc.output_dir + "/metrics.csv");
  csv << "model,step,mae,mse\n";
  for (const auto& [name, r] : {std::pair<const char*, const MetricsReport&>{"draformer", m}, {"repeat_last", b}}) {
    csv << name << ",all," << fmt17(r.mae) << ',' << fmt17(r.mse) << '\n';
    for (std::size_t t = 0; t < r.step_mae.size(); ++t) {
      csv << name << ',' << t + 1 << ',' << fmt17(r.step_mae[t]) << ',' << fmt17(r.step_mse[t]) << '\n';
    }
  }
  std::ofstream report(rc.output_dir + "/metrics.txt");
  report << "split=" << rc.split << '\n'
         << "windows=" << m.windows << '\n'
         << "mae=" << fmt17(m.mae) << '\n'
         << "mse=" << fmt17(m.mse) << '\n'
         << "baseline_mae=" << fmt17(b.mae) << '\n'
         << "baseline_mse=" << fmt17(b.mse) << '\n'
         << "runtime_seconds=" << m.runtime_seconds << '\n'
         << "seed=" << m.seed << '\n';
  for (const auto& [k, v] : m.config) report << "config." << k << '=' << v << '\n';

  std::cout << "split " << rc.split << ", " << m.windows << " windows, horizon " << horizon << '\n'
            << "  DRAformer    mae " << m.mae << "  mse " << m.mse << '\n'
            << "  repeat-last  mae " << b.mae << "  mse " << b.mse << '\n';
  return 0;
}

int cmd_predict(const RunConfig& rc) {
  const Loaded l = load_model_and_data(rc);
  const std::vector<Window> windows = eval_windows(pick_split(l.splits, rc.split), l.ckpt.config);
  if (rc.window >= static_cast<Index>(windows.size())) {
    throw DataError("window " + std::to_string(rc.window) + " out of range (" + std::to_string(windows.size()) +
                    " windows)");
  }
  ensure_dir(rc.output_dir);
  const std::string path = rc.output_dir + "/predictions.csv";
  std::ofstream out(path);
  out << "window_id,step,variable,actual,predicted\n";
  const std::size_t first = rc.window < 0 ? 0 : static_cast<std::size_t>(rc.window);
  const std::size_t last = rc.window < 0 ? windows.size() : first + 1;
  for (std::size_t w = first; w < last; ++w) {
    const Matrix pred = l.model.predict(windows[w].x);
    for (Index t = 0; t < pred.rows(); ++t) {
      for (Index v = 0; v < pred.cols(); ++v) {
        const std::string& name = l.ckpt.variables.empty() ? std::to_string(v)
                                                            : l.ckpt.variables[static_cast<std::size_t>(v)];
        out << w << ',' << t + 1 << ',' << name << ',' << fmt17(windows[w].y(t, v)) << ',' << fmt17(pred(t, v))
            << '\n';
      }
    }
  }
  std::cout << "wrote " << (last - first) << " window(s) to " << path << '\n';
  return 0;
}

int cmd_ablate(const RunConfig& rc) {
  const TimeSeriesFrame frame = load_dataset(rc);
  const std::vector<Index> horizons = rc.horizons.empty() ? std::vector<Index>{rc.train.pred_len} : rc.horizons;
  const std::vector<AblationRow> rows = run_ablation(rc.train, frame, horizons);

  ensure_dir(rc.output_dir);
  std::ofstream csv(rc.output_dir + "/ablation.csv");
  csv << "variant,horizon,mae,mse,param_count\n";
  for (const auto& r : rows) {
    csv << variant_name(r.variant) << ',' << r.horizon << ',' << fmt17(r.mae) << ',' << fmt17(r.mse) << ','
        << r.param_count << '\n';
  }
  std::ofstream names(rc.output_dir + "/ablation_params.txt");
  for (Variant v : {Variant::full, Variant::no_recon_attention, Variant::no_recon_sequence}) {
    for (const auto& n : DraModel::declare_params(ablate(rc.train, v), frame.variables()).names()) {
      names << variant_name(v) << ' ' << n << '\n';
    }
  }

  std::cout << std::left << std::setw(12) << "variant" << std::setw(9) << "horizon" << std::setw(14) << "mae"
            << std::setw(14) << "mse" << "params\n";
  for (const auto& r : rows) {
    std::cout << std::setw(12) << variant_name(r.variant) << std::setw(9) << r.horizon << std::setw(14) << r.mae
              << std::setw(14) << r.mse << r.param_count << '\n';
  }
  return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
  bool ok = true;
  for (const GradCheckResult& r : run_gradient_suite(seed)) {
    std::cout << (r.pass() ? "PASS " : "FAIL ") << std::left << std::setw(20) << r.name << " max_rel_error "
              << std::setw(13) << r.max_rel_error << " tolerance " << r.tolerance << " (worst: " << r.worst_param
              << ")\n";
    ok = ok && r.pass();
  }
  return ok ? 0 : kRuntimeError;
}

int cmd_plot(const RunConfig& rc, std::string out_path) {
  const Loaded l = load_model_and_data(rc);
  const std::vector<Window> windows = eval_windows(pick_split(l.splits, rc.split), l.ckpt.config);
  const Index w = rc.window < 0 ? 0 : rc.window;
  if (w >= static_cast<Index>(windows.size())) {
    throw DataError("window " + std::to_string(w) + " out of range (" + std::to_string(windows.size()) +
                    " windows)");
  }
  if (rc.variable < 0 || rc.variable >= l.ckpt.n_vars) {
    throw UsageError("variable index " + std::to_string(rc.variable) + " out of range");
  }
  const Window& win = windows[static_cast<std::size_t>(w)];
  const std::string name = l.ckpt.variables.empty() ? std::to_string(rc.variable)
                                                     : l.ckpt.variables[static_cast<std::size_t>(rc.variable)];
  const std::string svg = prediction_svg(rc.split + " window " + std::to_string(w) + ", " + name + " (normalised)",
                                         win.x, win.y, l.model.predict(win.x), rc.variable);
  if (out_path.empty()) {
    out_path = rc.output_dir + "/plot_w" + std::to_string(w) + "_v" + std::to_string(rc.variable) + ".svg";
  }
  if (const auto parent = fs::path(out_path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream(out_path) << svg;
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"draformer: multivariate time-series forecasting"};
  app.require_subcommand(1);
  app.footer("Configuration keys (file or --set):\n" + [] {
    std::string s;
    for (const auto& [k, d] : run_config_keys()) s += "  " + k + ": " + d + "\n";
    return s;
  }());

  CommonOptions train_o, eval_o, predict_o, ablate_o, plot_o;
  CLI::App* train = app.add_subcommand("train", "fit a model and write checkpoint and training log");
  train_o.attach(train);
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "write metrics for a checkpoint on a split");
  eval_o.attach(evaluate_cmd);
  CLI::App* predict = app.add_subcommand("predict", "write predicted vs actual values as CSV");
  predict_o.attach(predict);
  CLI::App* ablate_cmd = app.add_subcommand("ablate", "train full, -attention and -sequence variants");
  ablate_o.attach(ablate_cmd);
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every module");
  std::uint64_t grad_seed = 1;
  gradcheck->add_option("--seed", grad_seed, "seed of the toy inputs");
  CLI::App* plot = app.add_subcommand("plot", "SVG of prediction vs ground truth for one window");
  plot_o.attach(plot);
  std::string plot_out;
  plot->add_option("-o,--out", plot_out, "SVG path (default <output_dir>/plot_w<window>_v<variable>.svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*train) return cmd_train(train_o.resolve());
    if (*evaluate_cmd) return cmd_evaluate(eval_o.resolve());
    if (*predict) return cmd_predict(predict_o.resolve());
    if (*ablate_cmd) return cmd_ablate(ablate_o.resolve());
    if (*gradcheck) return cmd_gradcheck(grad_seed);
    if (*plot) return cmd_plot(plot_o.resolve(), plot_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
