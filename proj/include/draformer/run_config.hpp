#pragma once

// Flat key = value run configuration shared by every CLI command. Lines
// starting with '#' are comments. Unknown keys are rejected.

#include "draformer/config.hpp"
#include "draformer/csv_io.hpp"
#include "draformer/synthetic.hpp"

#include <istream>
#include <map>
#include <string>
#include <vector>

namespace draformer {

struct RunConfig {
  TrainConfig train;
  /// CSV path, or "synthetic" for the built-in sinusoid-plus-AR generator.
  std::string data;
  std::string preset = "generic";
  CsvOptions csv;
  SyntheticSpec synthetic;
  std::string output_dir = "out";
  /// Defaults to <output_dir>/model.ckpt.
  std::string checkpoint;
  /// Split used by evaluate, predict and plot: train, val or test.
  std::string split = "test";
  /// Window index for plot; predict writes every window when negative.
  Index window = 0;
  Index variable = 0;
  /// Horizons for ablate; empty uses pred_len.
  std::vector<Index> horizons;

  std::string checkpoint_path() const;
};

using KeyValues = std::map<std::string, std::string>;

/// Parses key = value lines. Later duplicates override earlier ones.
KeyValues parse_key_values(std::istream& in, const std::string& source = "stream");

/// Builds a RunConfig from merged key/values; the preset is applied before
/// individual CSV keys.
RunConfig make_run_config(const KeyValues& values);

RunConfig load_run_config(const std::string& path, const KeyValues& overrides = {});

/// Every accepted key with a one-line description, for help output.
std::vector<std::pair<std::string, std::string>> run_config_keys();

}  // namespace draformer
