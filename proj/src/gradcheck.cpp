#include "draformer/gradcheck.hpp"

#include "draformer/errors.hpp"

#include <algorithm>
#include <cmath>

namespace draformer {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double evaluate(const ScalarFn& f, const Matrix& x) {
  Tape t;
  Var y = f(t, t.constant(x));
  return y.value()(0, 0);
}

double evaluate(const ParamLossFn& f, const ParamStore& params) {
  Tape t;
  Var y = f(t, params);
  return y.value()(0, 0);
}

}  // namespace

double grad_check(const ScalarFn& f, const Matrix& x, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw DomainError("grad_check: step must lie in [1e-7, 1e-3]");
  Tape tape;
  Var xv = tape.leaf(x);
  Var y = f(tape, xv);
  tape.backward(y);
  const Matrix analytic = tape.grad(xv);

  double worst = 0.0;
  Matrix probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double up = evaluate(f, probe);
    probe.data()[i] = orig - h;
    const double down = evaluate(f, probe);
    probe.data()[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    worst = std::max(worst, relative_error(analytic.data()[i], numeric));
  }
  return worst;
}

ParamGradReport grad_check_params(const ParamLossFn& f, const ParamStore& params, double h,
                                  const std::vector<std::string>& only) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw DomainError("grad_check: step must lie in [1e-7, 1e-3]");
  Tape tape;
  Var y = f(tape, params);
  tape.backward(y);
  const GradMap analytic = tape.param_grads(params);

  ParamGradReport report;
  ParamStore probe = params;
  for (const auto& name : params.names()) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Matrix& slot = probe.get_mut(name);
    const Matrix& g = analytic.at(name);
    for (Index i = 0; i < slot.size(); ++i) {
      const double orig = slot.data()[i];
      slot.data()[i] = orig + h;
      const double up = evaluate(f, probe);
      slot.data()[i] = orig - h;
      const double down = evaluate(f, probe);
      slot.data()[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(g.data()[i], numeric);
      if (err > report.max_rel_error || report.worst_param.empty()) {
        report.max_rel_error = std::max(err, report.max_rel_error);
        report.worst_param = name;
        report.worst_index = i;
        report.worst_analytic = g.data()[i];
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace draformer
