#include "draformer/run_config.hpp"

#include "draformer/errors.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace draformer {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long out = std::stoll(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'");
}

double to_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + v + "'");
}

char to_char(const std::string& key, const std::string& v) {
  if (v == "tab" || v == "\\t") return '\t';
  if (v == "semicolon") return ';';
  if (v == "comma") return ',';
  if (v.size() == 1) return v[0];
  throw ConfigError("key '" + key + "' expects a single character, got '" + v + "'");
}

const std::vector<std::pair<std::string, std::string>>& run_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"data", "CSV path, or 'synthetic'"},
      {"preset", "CSV preset: airquality, electricity, stock, smartphone, generic"},
      {"delimiter", "field delimiter (single character, 'tab', 'comma' or 'semicolon')"},
      {"decimal", "decimal separator"},
      {"sentinel", "numeric missing-value marker"},
      {"timestamp_column", "header name of the timestamp column"},
      {"time_column", "header name of a separate time-of-day column"},
      {"timestamp_format", "std::get_time format of the timestamp"},
      {"columns", "comma-separated value columns to keep"},
      {"max_rows", "read at most this many data rows (0 = all)"},
      {"max_missing_fraction", "drop columns with a larger missing share"},
      {"resample_hourly", "average into hourly buckets"},
      {"synthetic_length", "rows of the synthetic series"},
      {"synthetic_vars", "variables of the synthetic series"},
      {"synthetic_seed", "seed of the synthetic series"},
      {"output_dir", "directory for checkpoints, logs and reports"},
      {"checkpoint", "checkpoint path (default <output_dir>/model.ckpt)"},
      {"split", "split for evaluate/predict/plot: train, val, test"},
      {"window", "window index for plot (predict: -1 = all)"},
      {"variable", "variable index for plot"},
      {"horizons", "comma-separated prediction lengths for ablate"},
  };
  return keys;
}

}  // namespace

std::string RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? output_dir + "/model.ckpt" : checkpoint;
}

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> run_config_keys() {
  auto keys = run_keys();
  for (const auto& [key, value] : TrainConfig{}.to_map()) keys.emplace_back(key, "training (default " + value + ")");
  return keys;
}

RunConfig make_run_config(const KeyValues& values) {
  const auto training = TrainConfig{}.to_map();
  std::set<std::string> known;
  for (const auto& [k, d] : run_keys()) known.insert(k);
  KeyValues train_values;
  for (const auto& [key, value] : values) {
    if (training.count(key)) {
      train_values[key] = value;
    } else if (!known.count(key)) {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }

  RunConfig rc;
  rc.train = TrainConfig::from_map(train_values);
  const auto get = [&values](const std::string& key) -> const std::string* {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };
  if (const auto* v = get("preset")) rc.preset = *v;
  rc.csv = csv_preset(rc.preset);
  if (const auto* v = get("data")) rc.data = *v;
  if (const auto* v = get("delimiter")) rc.csv.delimiter = to_char("delimiter", *v);
  if (const auto* v = get("decimal")) rc.csv.decimal = to_char("decimal", *v);
  if (const auto* v = get("sentinel")) {
    if (v->empty() || *v == "none") rc.csv.sentinel.reset();
    else rc.csv.sentinel = to_number("sentinel", *v);
  }
  if (const auto* v = get("timestamp_column")) {
    if (*v == "none") rc.csv.timestamp_column.reset();
    else rc.csv.timestamp_column = *v;
  }
  if (const auto* v = get("time_column")) {
    if (v->empty() || *v == "none") rc.csv.time_column.reset();
    else rc.csv.time_column = *v;
  }
  if (const auto* v = get("timestamp_format")) rc.csv.timestamp_format = *v;
  if (const auto* v = get("columns")) rc.csv.columns = split_list(*v);
  if (const auto* v = get("max_rows")) rc.csv.max_rows = to_integer("max_rows", *v);
  if (const auto* v = get("max_missing_fraction")) rc.csv.max_missing_fraction = to_number("max_missing_fraction", *v);
  if (const auto* v = get("resample_hourly")) rc.csv.resample_hourly = to_bool("resample_hourly", *v);
  if (const auto* v = get("synthetic_length")) rc.synthetic.length = to_integer("synthetic_length", *v);
  if (const auto* v = get("synthetic_vars")) rc.synthetic.n_vars = to_integer("synthetic_vars", *v);
  if (const auto* v = get("synthetic_seed")) {
    rc.synthetic.seed = static_cast<std::uint64_t>(to_integer("synthetic_seed", *v));
  }
  if (const auto* v = get("output_dir")) rc.output_dir = *v;
  if (const auto* v = get("checkpoint")) rc.checkpoint = *v;
  if (const auto* v = get("split")) {
    if (*v != "train" && *v != "val" && *v != "test") throw ConfigError("split must be train, val or test");
    rc.split = *v;
  }
  if (const auto* v = get("window")) rc.window = to_integer("window", *v);
  if (const auto* v = get("variable")) rc.variable = to_integer("variable", *v);
  if (const auto* v = get("horizons")) {
    for (const auto& h : split_list(*v)) rc.horizons.push_back(to_integer("horizons", h));
  }
  return rc;
}

RunConfig load_run_config(const std::string& path, const KeyValues& overrides) {
  KeyValues values;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration '" + path + "'");
    values = parse_key_values(in, path);
  }
  for (const auto& [k, v] : overrides) values[k] = v;
  return make_run_config(values);
}

}  // namespace draformer
