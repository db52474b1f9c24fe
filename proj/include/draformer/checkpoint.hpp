#pragma once

// Versioned plain-text checkpoint: configuration, normalisation statistics
// and every named parameter with its shape, written at 17 significant digits
// so that a reload reproduces the parameters bit for bit.

#include "draformer/config.hpp"
#include "draformer/params.hpp"
#include "draformer/series.hpp"

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace draformer {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  Index n_vars = 0;
  std::vector<std::string> variables;
  std::optional<NormStats> stats;
  ParamStore params;
  Index best_epoch = -1;
  double best_val_mse = 0.0;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in, const std::string& source = "stream");

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace draformer
