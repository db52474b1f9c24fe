#pragma once

#include "draformer/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace draformer {

/// Multivariate series: L rows in time order by N named variables.
struct TimeSeriesFrame {
  std::vector<std::string> names;
  /// Seconds since the Unix epoch (UTC), one per row, when known.
  std::optional<std::vector<std::int64_t>> timestamps;
  Matrix values;
  std::string source;

  Index length() const { return values.rows(); }
  Index variables() const { return values.cols(); }

  /// Rows [start, start + count) with names and source preserved.
  TimeSeriesFrame slice(Index start, Index count) const;
};

/// Canonical text form: header line, then one CSV line per row with 17
/// significant digits. Equal frames serialise to identical bytes.
std::string serialize_frame(const TimeSeriesFrame& frame);

}  // namespace draformer
