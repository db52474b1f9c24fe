#include "draformer/csv_io.hpp"

#include "draformer/errors.hpp"
#include "draformer/log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace draformer {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"') {
      if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else {
        quoted = !quoted;
      }
    } else if (c == delimiter && !quoted) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "?" || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

std::optional<double> parse_number(std::string text, char decimal) {
  if (decimal != '.') std::replace(text.begin(), text.end(), decimal, '.');
  double v = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

Index find_column(const std::vector<std::string>& header, const std::string& name, const std::string& what) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError(what + " column '" + name + "' not found in header");
  return static_cast<Index>(it - header.begin());
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(const std::string& text, const std::string& format) {
  std::tm tm{};
  std::istringstream in(text);
  in >> std::get_time(&tm, format.c_str());
  if (in.fail()) return std::nullopt;
  in >> std::ws;
  if (!in.eof()) return std::nullopt;
  return static_cast<std::int64_t>(timegm(&tm));
}

std::vector<std::string> csv_preset_names() { return {"airquality", "electricity", "stock", "smartphone", "generic"}; }

CsvOptions csv_preset(const std::string& name) {
  CsvOptions o;
  if (name == "generic") return o;
  if (name == "airquality") {
    o.delimiter = ';';
    o.decimal = ',';
    o.sentinel = -200.0;
    o.timestamp_column = "Date";
    o.time_column = "Time";
    o.timestamp_format = "%d/%m/%Y %H.%M.%S";
    return o;
  }
  if (name == "electricity") {
    o.delimiter = ';';
    o.decimal = ',';
    o.timestamp_column = "";
    o.resample_hourly = true;
    return o;
  }
  if (name == "stock") {
    o.timestamp_column = "Date";
    o.timestamp_format = "%Y-%m-%d";
    o.columns = {"Open", "High", "Low", "Close", "Adj Close", "Volume"};
    return o;
  }
  if (name == "smartphone") return o;
  throw ConfigError("unknown dataset preset '" + name + "'");
}

TimeSeriesFrame parse_csv(std::istream& in, const CsvOptions& options, const std::string& source) {
  std::string line;
  Index line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) {
      header = split_line(line, options.delimiter);
      break;
    }
  }
  if (header.empty()) throw DataError(source + ": no header row");
  for (auto& h : header) h = trim(h);

  const std::optional<Index> ts_col =
      options.timestamp_column ? std::optional<Index>(find_column(header, *options.timestamp_column, "timestamp"))
                               : std::nullopt;
  const std::optional<Index> time_col =
      options.time_column ? std::optional<Index>(find_column(header, *options.time_column, "time")) : std::nullopt;

  std::vector<Index> value_cols;
  if (!options.columns.empty()) {
    for (const auto& c : options.columns) value_cols.push_back(find_column(header, c, "value"));
  } else {
    for (Index i = 0; i < static_cast<Index>(header.size()); ++i) {
      if (i == ts_col || i == time_col || header[static_cast<std::size_t>(i)].empty()) continue;
      value_cols.push_back(i);
    }
  }
  if (value_cols.empty()) throw DataError(source + ": no value columns");

  std::vector<std::vector<double>> rows;
  std::vector<std::int64_t> stamps;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields = split_line(line, options.delimiter);
    if (std::all_of(fields.begin(), fields.end(), [](const std::string& f) { return trim(f).empty(); })) continue;
    if (options.max_rows > 0 && static_cast<Index>(rows.size()) >= options.max_rows) break;
    if (fields.size() < header.size()) {
      throw FormatError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(fields.size()));
    }
    if (ts_col) {
      std::string text = trim(fields[static_cast<std::size_t>(*ts_col)]);
      if (time_col) text += " " + trim(fields[static_cast<std::size_t>(*time_col)]);
      const auto ts = parse_timestamp(text, options.timestamp_format);
      if (!ts) {
        throw FormatError(source + ":" + std::to_string(line_no) + ": cannot parse timestamp '" + text + "'");
      }
      stamps.push_back(*ts);
    }
    std::vector<double> row;
    row.reserve(value_cols.size());
    for (Index c : value_cols) {
      const std::string cell = trim(fields[static_cast<std::size_t>(c)]);
      if (is_missing_token(cell)) {
        row.push_back(kMissing);
        continue;
      }
      const auto v = parse_number(cell, options.decimal);
      if (!v) {
        throw FormatError(source + ":" + std::to_string(line_no) + ": column '" + header[static_cast<std::size_t>(c)] +
                          "' has non-numeric value '" + cell + "'");
      }
      row.push_back(options.sentinel && *v == *options.sentinel ? kMissing : *v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(source + ": no data rows");

  const Index n_rows = static_cast<Index>(rows.size());
  TimeSeriesFrame frame;
  frame.source = source;
  std::vector<Index> kept;
  for (std::size_t j = 0; j < value_cols.size(); ++j) {
    const auto missing = std::count_if(rows.begin(), rows.end(), [j](const auto& r) { return std::isnan(r[j]); });
    const double fraction = static_cast<double>(missing) / static_cast<double>(n_rows);
    const std::string& name = header[static_cast<std::size_t>(value_cols[j])];
    if (fraction > options.max_missing_fraction) {
      log::warn("dropping column '" + name + "': " + std::to_string(static_cast<int>(std::round(100 * fraction))) +
                "% missing");
      continue;
    }
    kept.push_back(static_cast<Index>(j));
    frame.names.push_back(name);
  }
  if (kept.empty()) throw DataError(source + ": every column exceeds the missing-value limit");

  frame.values.resize(n_rows, static_cast<Index>(kept.size()));
  for (Index c = 0; c < static_cast<Index>(kept.size()); ++c) {
    const std::size_t j = static_cast<std::size_t>(kept[static_cast<std::size_t>(c)]);
    double last = kMissing;
    for (Index r = 0; r < n_rows; ++r) {
      const double v = rows[static_cast<std::size_t>(r)][j];
      if (!std::isnan(v)) last = v;
      frame.values(r, c) = last;
    }
    Index first = 0;
    while (std::isnan(frame.values(first, c))) ++first;
    for (Index r = 0; r < first; ++r) frame.values(r, c) = frame.values(first, c);
  }
  if (ts_col) frame.timestamps = std::move(stamps);
  return options.resample_hourly ? resample_hourly(frame) : frame;
}

TimeSeriesFrame load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_csv(in, options, path);
}

TimeSeriesFrame resample_hourly(const TimeSeriesFrame& frame) {
  if (!frame.timestamps || frame.timestamps->size() != static_cast<std::size_t>(frame.length())) {
    throw ConfigError("resample_hourly: frame has no timestamps");
  }
  if (frame.length() == 0) throw DataError("resample_hourly: empty frame");
  const auto& ts = *frame.timestamps;
  const auto bucket_of = [](std::int64_t t) { return t >= 0 ? t / 3600 : -((-t + 3599) / 3600); };
  std::map<std::int64_t, std::pair<Vector, Index>> buckets;
  for (Index r = 0; r < frame.length(); ++r) {
    auto [it, inserted] = buckets.try_emplace(bucket_of(ts[static_cast<std::size_t>(r)]),
                                              Vector::Zero(frame.variables()), 0);
    it->second.first += frame.values.row(r).transpose();
    ++it->second.second;
  }
  const std::int64_t first = buckets.begin()->first;
  const std::int64_t last = buckets.rbegin()->first;
  TimeSeriesFrame out;
  out.names = frame.names;
  out.source = frame.source;
  out.values.resize(static_cast<Index>(last - first + 1), frame.variables());
  std::vector<std::int64_t> stamps;
  Vector previous;
  for (std::int64_t b = first; b <= last; ++b) {
    const auto it = buckets.find(b);
    if (it != buckets.end()) previous = it->second.first / static_cast<double>(it->second.second);
    out.values.row(static_cast<Index>(b - first)) = previous.transpose();
    stamps.push_back(b * 3600);
  }
  out.timestamps = std::move(stamps);
  return out;
}

}  // namespace draformer
