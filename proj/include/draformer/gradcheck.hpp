#pragma once

#include "draformer/autodiff.hpp"

#include <functional>
#include <string>
#include <vector>

namespace draformer {

/// Scalar function of a single input recorded on a fresh tape.
using ScalarFn = std::function<Var(Tape&, Var)>;
/// Scalar function of a parameter store recorded on a fresh tape.
using ParamLossFn = std::function<Var(Tape&, const ParamStore&)>;

/// Relative error between an analytic and a numeric derivative, with the
/// denominator floored at 1e-8.
double relative_error(double analytic, double numeric);

/// Compares the tape gradient of f at x against central finite differences
/// with step h and returns the maximum relative error.
double grad_check(const ScalarFn& f, const Matrix& x, double h = 1e-6);

struct ParamGradReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  Index worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Finite-difference check of every entry of every parameter in `params`
/// (or only those listed in `only`, when non-empty).
ParamGradReport grad_check_params(const ParamLossFn& f, const ParamStore& params, double h = 1e-6,
                                  const std::vector<std::string>& only = {});

}  // namespace draformer
