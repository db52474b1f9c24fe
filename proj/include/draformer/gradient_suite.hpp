#pragma once

// Finite-difference checks of every differentiable module on toy shapes.

#include <cstdint>
#include <string>
#include <vector>

namespace draformer {

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::string worst_param;
  bool pass() const { return max_rel_error <= tolerance; }
};

/// ida_forward and jsa_forward at 1e-4; encoder_layer, time_distill,
/// dimension_converge, decode and the end-to-end loss at 1e-3.
std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed = 1);

}  // namespace draformer
