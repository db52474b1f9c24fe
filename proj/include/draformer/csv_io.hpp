#pragma once

// Delimited-text ingestion with per-dataset presets. Missing cells (empty,
// "?", "NA", "NaN" or the sentinel) are forward-filled, leading gaps
// back-filled; columns missing more than half their rows are dropped.

#include "draformer/frame.hpp"

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace draformer {

struct CsvOptions {
  char delimiter = ',';
  char decimal = '.';
  std::optional<double> sentinel;
  /// Header name of the timestamp column ("" is a valid, unnamed column).
  std::optional<std::string> timestamp_column;
  /// Optional time-of-day column joined to the timestamp with a space.
  std::optional<std::string> time_column;
  /// std::get_time format of the (joined) timestamp text, read as UTC.
  std::string timestamp_format = "%Y-%m-%d %H:%M:%S";
  /// Value columns to keep; empty keeps every named non-timestamp column.
  std::vector<std::string> columns;
  /// Read at most this many data rows; 0 reads all.
  Index max_rows = 0;
  double max_missing_fraction = 0.5;
  bool resample_hourly = false;
};

/// Options for "airquality", "electricity", "stock", "smartphone" or "generic".
CsvOptions csv_preset(const std::string& name);
std::vector<std::string> csv_preset_names();

TimeSeriesFrame parse_csv(std::istream& in, const CsvOptions& options, const std::string& source = "stream");
TimeSeriesFrame load_csv(const std::string& path, const CsvOptions& options);

/// Hourly mean buckets from the first to the last timestamp; empty hours
/// repeat the previous bucket.
TimeSeriesFrame resample_hourly(const TimeSeriesFrame& frame);

/// Seconds since the Unix epoch for text in the given std::get_time format.
std::optional<std::int64_t> parse_timestamp(const std::string& text, const std::string& format);

}  // namespace draformer
