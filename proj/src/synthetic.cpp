#include "draformer/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace draformer {

TimeSeriesFrame sinusoid_ar_series(const SyntheticSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  // Box-Muller on raw draws keeps the series identical across standard libraries.
  const auto gaussian = [&rng]() {
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };
  TimeSeriesFrame f;
  f.source = "synthetic";
  f.values.resize(spec.length, spec.n_vars);
  for (Index n = 0; n < spec.n_vars; ++n) {
    f.names.push_back("s" + std::to_string(n));
    const double phase = 0.9 * static_cast<double>(n);
    double e = 0.0;
    for (Index t = 0; t < spec.length; ++t) {
      e = spec.ar_phi * e + spec.noise_sd * gaussian();
      const double tt = static_cast<double>(t);
      f.values(t, n) = std::sin(2.0 * std::numbers::pi * tt / 24.0 + phase) +
                       0.5 * std::sin(2.0 * std::numbers::pi * tt / 96.0 + 2.0 * phase) + e;
    }
  }
  return f;
}

}  // namespace draformer
