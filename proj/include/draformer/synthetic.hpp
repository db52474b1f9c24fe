#pragma once

#include "draformer/frame.hpp"

#include <cstdint>

namespace draformer {

/// Sum of a daily (period 24) and a slower (period 96) sinusoid per
/// variable, with phase offsets, plus AR(1) noise e_t = phi e_{t-1} + sd z_t.
struct SyntheticSpec {
  Index length = 5000;
  Index n_vars = 2;
  double ar_phi = 0.7;
  double noise_sd = 0.15;
  std::uint64_t seed = 1;
};

TimeSeriesFrame sinusoid_ar_series(const SyntheticSpec& spec);

}  // namespace draformer
