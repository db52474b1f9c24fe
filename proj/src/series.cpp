#include "draformer/series.hpp"

#include "draformer/log.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace draformer {

TimeSeriesFrame TimeSeriesFrame::slice(Index start, Index count) const {
  if (start < 0 || count < 0 || start + count > length()) {
    throw DimensionError("frame slice [" + std::to_string(start) + ", " + std::to_string(start + count) +
                         ") out of range for " + std::to_string(length()) + " rows");
  }
  TimeSeriesFrame out;
  out.names = names;
  out.source = source;
  out.values = values.middleRows(start, count);
  if (timestamps) {
    out.timestamps = std::vector<std::int64_t>(timestamps->begin() + start, timestamps->begin() + start + count);
  }
  return out;
}

std::string serialize_frame(const TimeSeriesFrame& frame) {
  std::ostringstream os;
  if (frame.timestamps) os << "timestamp";
  for (std::size_t c = 0; c < frame.names.size(); ++c) {
    if (c > 0 || frame.timestamps) os << ',';
    os << frame.names[c];
  }
  os << '\n';
  char buf[32];
  for (Index r = 0; r < frame.length(); ++r) {
    if (frame.timestamps) os << (*frame.timestamps)[static_cast<std::size_t>(r)];
    for (Index c = 0; c < frame.variables(); ++c) {
      if (c > 0 || frame.timestamps) os << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", frame.values(r, c));
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

std::vector<Window> make_windows(const Matrix& series, Index input_len, Index pred_len, Index stride) {
  if (input_len < 1 || pred_len < 1) throw ConfigError("make_windows: lengths must be positive");
  if (stride < 1) throw ConfigError("make_windows: stride must be at least 1");
  const Index needed = input_len + pred_len;
  if (series.rows() < needed) {
    throw InsufficientDataError("make_windows: series has " + std::to_string(series.rows()) +
                                " rows, at least " + std::to_string(needed) + " required");
  }
  const Index count = (series.rows() - needed) / stride + 1;
  std::vector<Window> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index w = 0; w < count; ++w) {
    const Index origin = w * stride;
    out.push_back(Window{series.middleRows(origin, input_len), series.middleRows(origin + input_len, pred_len),
                         origin});
  }
  return out;
}

EmbeddedTriple embed(Tape& tape, const DiffTriple& triple, Var w_f, Var w_x, Var w_b) {
  const Index n = triple.raw.cols();
  for (Var w : {w_f, w_x, w_b}) {
    if (w.rows() != n) {
      throw DimensionError("embed: weight " + shape_string(w.value()) + " does not map " + std::to_string(n) +
                           " variables");
    }
  }
  EmbeddedTriple out;
  out.ex_fwd = matmul(tape.constant(triple.d_fwd), w_f);
  out.ex_raw = matmul(tape.constant(triple.raw), w_x);
  out.ex_bwd = matmul(tape.constant(triple.d_bwd), w_b);
  return out;
}

NormStats fit_normalization(const Matrix& training_values, const std::vector<std::string>& names) {
  if (training_values.rows() == 0) throw DataError("fit_normalization: empty training split");
  NormStats stats;
  stats.mean = training_values.colwise().mean().transpose();
  const Matrix centered = training_values.rowwise() - stats.mean.transpose();
  stats.scale = (centered.cwiseAbs2().colwise().mean()).cwiseSqrt().transpose();
  for (Index c = 0; c < stats.scale.size(); ++c) {
    if (!(stats.scale(c) > 1e-12)) {
      const std::string label =
          c < static_cast<Index>(names.size()) ? names[static_cast<std::size_t>(c)] : std::to_string(c);
      log::warn("variable '" + label + "' has zero variance in the training split; using unit scale");
      stats.scale(c) = 1.0;
    }
  }
  return stats;
}

Matrix normalize(const Matrix& values, const NormStats& stats) {
  if (values.cols() != stats.mean.size()) {
    throw DimensionError("normalize: " + std::to_string(values.cols()) + " columns vs " +
                         std::to_string(stats.mean.size()) + " statistics");
  }
  Matrix out = values.rowwise() - stats.mean.transpose();
  return out.array().rowwise() / stats.scale.transpose().array();
}

TimeSeriesFrame normalize(const TimeSeriesFrame& frame, const NormStats& stats) {
  TimeSeriesFrame out = frame;
  out.values = normalize(frame.values, stats);
  return out;
}

Matrix denormalize(const Matrix& values, const NormStats& stats) {
  if (values.cols() != stats.mean.size()) {
    throw DimensionError("denormalize: " + std::to_string(values.cols()) + " columns vs " +
                         std::to_string(stats.mean.size()) + " statistics");
  }
  Matrix out = values.array().rowwise() * stats.scale.transpose().array();
  return out.rowwise() + stats.mean.transpose();
}

}  // namespace draformer
