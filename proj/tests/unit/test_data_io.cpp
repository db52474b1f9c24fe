#include "draformer/checkpoint.hpp"
#include "draformer/csv_io.hpp"
#include "draformer/errors.hpp"
#include "draformer/log.hpp"
#include "draformer/model.hpp"
#include "draformer/run_config.hpp"
#include "draformer/svg_plot.hpp"
#include "fixtures/airquality_fixture.hpp"
#include "unit/test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace draformer;
using draformer::testing::random_matrix;

namespace {

TimeSeriesFrame parse(const std::string& text, const CsvOptions& options = {}) {
  std::istringstream in(text);
  return parse_csv(in, options, "test.csv");
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("draformer_test_" + name)).string();
}

}  // namespace

TEST_CASE("parse_csv reads a well-formed file") {
  const TimeSeriesFrame f = parse("a,b\n1,2\n3,4\n5,6\n");
  CHECK(f.names == std::vector<std::string>{"a", "b"});
  REQUIRE(f.length() == 3);
  REQUIRE(f.variables() == 2);
  CHECK(f.values(2, 1) == 6.0);
  CHECK(f.source == "test.csv");
  CHECK_FALSE(f.timestamps.has_value());

  const std::string path = temp_path("three_rows.csv");
  {
    std::ofstream out(path);
    out << "a,b\n1,2\n3,4\n5,6\n";
  }
  const TimeSeriesFrame loaded = load_csv(path, {});
  CHECK(loaded.values == f.values);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_csv(path, {}), DataError);
}

TEST_CASE("parse_csv fills missing values") {
  CsvOptions opts;
  opts.sentinel = -200.0;
  const TimeSeriesFrame f = parse("a\n1\n-200\n3\n", opts);
  CHECK(f.values(1, 0) == 1.0);

  const TimeSeriesFrame lead = parse("a,b\n,1\nNA,2\n7,3\n8,4\n9,5\n?,6\n");
  CHECK(lead.values(0, 0) == 7.0);
  CHECK(lead.values(1, 0) == 7.0);
  CHECK(lead.values(3, 0) == 8.0);
  CHECK(lead.values(5, 0) == 9.0);
}

TEST_CASE("parse_csv rejects unusable input") {
  CHECK_THROWS_AS(parse("a,b\n"), DataError);
  CHECK_THROWS_AS(parse(""), DataError);
  try {
    parse("a,b\n1,2\n3,x\n");
    FAIL("expected FormatError");
  } catch (const FormatError& err) {
    CHECK(std::string(err.what()).find(":3:") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("a,b\n1,2\n3\n"), FormatError);
}

TEST_CASE("parse_csv drops mostly missing columns with a warning") {
  log::WarningCapture capture;
  const TimeSeriesFrame f = parse("a,b\n1,\n2,\n3,\n4,5\n");
  CHECK(f.names == std::vector<std::string>{"a"});
  CHECK(capture.contains("'b'"));
  CHECK_THROWS_AS(parse("a\n\n?\nNA\n"), DataError);
}

TEST_CASE("imputed values stay within the observed range") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::ostringstream text;
    text << "a,b\n";
    std::vector<double> seen_a;
    for (int r = 0; r < 40; ++r) {
      const double a = std::round(u(rng) * 1000.0) / 8.0;
      const bool miss = u(rng) < 0.3;
      if (!miss) seen_a.push_back(a);
      text << (miss ? std::string("NaN") : std::to_string(a)) << ',' << r << '\n';
    }
    if (seen_a.empty()) continue;
    const TimeSeriesFrame f = parse(text.str());
    REQUIRE(f.variables() == 2);
    const auto [lo, hi] = std::minmax_element(seen_a.begin(), seen_a.end());
    CHECK(f.values.col(0).minCoeff() >= *lo);
    CHECK(f.values.col(0).maxCoeff() <= *hi);
  }
}

TEST_CASE("parsing is deterministic") {
  const std::string text = "t,a,b\n2020-01-01 00:00:00,1.5,2\n2020-01-01 01:00:00,,3\n2020-01-01 02:00:00,4,?\n";
  CsvOptions opts;
  opts.timestamp_column = "t";
  const TimeSeriesFrame first = parse(text, opts);
  const TimeSeriesFrame second = parse(text, opts);
  CHECK(serialize_frame(first) == serialize_frame(second));
  REQUIRE(first.timestamps.has_value());
  CHECK((*first.timestamps)[1] - (*first.timestamps)[0] == 3600);
}

TEST_CASE("parse_csv reads the Air Quality layout") {
  const std::string path = temp_path("airquality.csv");
  fixtures::write_airquality_fixture(path, 48);
  log::WarningCapture capture;
  const TimeSeriesFrame f = load_csv(path, csv_preset("airquality"));
  std::filesystem::remove(path);
  CHECK(f.length() == 48);
  CHECK(f.variables() == 12);
  CHECK(capture.contains("NMHC(GT)"));
  CHECK(std::find(f.names.begin(), f.names.end(), "T") != f.names.end());
  CHECK(f.values.allFinite());
  CHECK((f.values.array() != -200.0).all());
  REQUIRE(f.timestamps.has_value());
  CHECK(f.timestamps->front() == 1078941600);
  CHECK(f.timestamps->back() - f.timestamps->front() == 47 * 3600);

  const TimeSeriesFrame decimal = parse("Date;Time;CO(GT);;\n10/03/2004;18.00.00;2,6;;\n", csv_preset("airquality"));
  CHECK(decimal.values(0, 0) == doctest::Approx(2.6));
}

TEST_CASE("max_rows and column selection") {
  CsvOptions opts;
  opts.max_rows = 2;
  opts.columns = {"b"};
  const TimeSeriesFrame f = parse("a,b,c\n1,2,3\n4,5,6\n7,8,9\n", opts);
  CHECK(f.length() == 2);
  CHECK(f.names == std::vector<std::string>{"b"});
  CHECK(f.values(1, 0) == 5.0);

  opts.columns = {"zz"};
  CHECK_THROWS_AS(parse("a,b\n1,2\n", opts), ConfigError);
}

TEST_CASE("resample_hourly") {
  TimeSeriesFrame quarter;
  quarter.names = {"a"};
  quarter.values = Matrix(4, 1);
  quarter.values << 1, 2, 3, 4;
  quarter.timestamps = std::vector<std::int64_t>{0, 900, 1800, 2700};
  const TimeSeriesFrame h = resample_hourly(quarter);
  REQUIRE(h.length() == 1);
  CHECK(h.values(0, 0) == 2.5);

  TimeSeriesFrame hourly;
  hourly.names = {"a", "b"};
  std::mt19937_64 rng(3);
  hourly.values = random_matrix(rng, 6, 2);
  hourly.timestamps = std::vector<std::int64_t>{0, 3600, 7200, 10800, 14400, 18000};
  const TimeSeriesFrame same = resample_hourly(hourly);
  CHECK(same.values == hourly.values);
  CHECK(*same.timestamps == *hourly.timestamps);

  TimeSeriesFrame gap;
  gap.names = {"a"};
  gap.values = Matrix(2, 1);
  gap.values << 5, 9;
  gap.timestamps = std::vector<std::int64_t>{0, 3 * 3600};
  const TimeSeriesFrame filled = resample_hourly(gap);
  REQUIRE(filled.length() == 4);
  CHECK(filled.values(1, 0) == 5.0);
  CHECK(filled.values(2, 0) == 5.0);
  CHECK(filled.values(3, 0) == 9.0);

  TimeSeriesFrame untimed;
  untimed.names = {"a"};
  untimed.values = Matrix::Zero(2, 1);
  CHECK_THROWS_AS(resample_hourly(untimed), ConfigError);
}

TEST_CASE("parse_timestamp") {
  CHECK(parse_timestamp("1970-01-02 00:00:00", "%Y-%m-%d %H:%M:%S") == 86400);
  CHECK(parse_timestamp("10/03/2004 18.00.00", "%d/%m/%Y %H.%M.%S") == 1078941600);
  CHECK_FALSE(parse_timestamp("garbage", "%Y-%m-%d").has_value());
}

TEST_CASE("run config parsing") {
  std::istringstream text("# comment\ndata = synthetic\nepochs = 3\n\nd_model=16\n");
  const KeyValues kv = parse_key_values(text);
  CHECK(kv.at("data") == "synthetic");
  CHECK(kv.at("d_model") == "16");

  RunConfig rc = make_run_config(kv);
  CHECK(rc.train.epochs == 3);
  CHECK(rc.train.d_model == 16);
  CHECK(rc.checkpoint_path() == (std::filesystem::path("out") / "model.ckpt").string());

  KeyValues bad = kv;
  bad["epochz"] = "1";
  CHECK_THROWS_AS(make_run_config(bad), ConfigError);

  KeyValues preset = {{"data", "x.csv"}, {"preset", "airquality"}, {"max_missing_fraction", "0.9"}};
  rc = make_run_config(preset);
  CHECK(rc.csv.delimiter == ';');
  CHECK(rc.csv.decimal == ',');
  CHECK(rc.csv.sentinel == -200.0);
  CHECK(rc.csv.max_missing_fraction == 0.9);

  CHECK_THROWS_AS(make_run_config({{"preset", "nope"}}), ConfigError);

  const std::string path = temp_path("run.cfg");
  {
    std::ofstream out(path);
    out << "data = synthetic\nepochs = 3\n";
  }
  rc = load_run_config(path, {{"epochs", "7"}});
  std::filesystem::remove(path);
  CHECK(rc.train.epochs == 7);
}

TEST_CASE("config map round trip") {
  TrainConfig c;
  c.d_model = 24;
  c.lr0 = 1.25e-4;
  c.seed = 12345678901234ULL;
  c.replace_recon_sequence = true;
  const TrainConfig back = TrainConfig::from_map(c.to_map());
  CHECK(back.to_map() == c.to_map());
  CHECK(back.lr0 == c.lr0);
  CHECK(back.seed == c.seed);
}

TEST_CASE("checkpoint round trip is bit exact") {
  TrainConfig c;
  c.input_len = 8;
  c.pred_len = 4;
  c.d_model = 8;
  c.k = 4;
  c.n_heads = 2;
  c.d_ff = 16;
  c.seed = 5;
  Checkpoint ckpt;
  ckpt.config = c;
  ckpt.n_vars = 2;
  ckpt.variables = {"x one", "y"};
  NormStats stats;
  stats.mean = Vector(2);
  stats.mean << 0.1, -3.0 / 7.0;
  stats.scale = Vector(2);
  stats.scale << 1.0 / 3.0, 2.0;
  ckpt.stats = stats;
  ckpt.params = DraModel::declare_params(c, 2);
  ckpt.best_epoch = 3;
  ckpt.best_val_mse = 0.123456789012345678;

  std::ostringstream out;
  write_checkpoint(out, ckpt);
  std::istringstream in(out.str());
  const Checkpoint back = read_checkpoint(in);
  CHECK(back.params == ckpt.params);
  CHECK(back.config.to_map() == c.to_map());
  CHECK(back.variables == ckpt.variables);
  REQUIRE(back.stats.has_value());
  CHECK(back.stats->mean == stats.mean);
  CHECK(back.stats->scale == stats.scale);
  CHECK(back.best_epoch == 3);
  CHECK(back.best_val_mse == ckpt.best_val_mse);

  const DraModel a(c, 2, ckpt.params);
  const DraModel b(back.config, back.n_vars, back.params);
  std::mt19937_64 rng(1);
  const Matrix x = random_matrix(rng, 8, 2);
  CHECK(a.predict(x) == b.predict(x));

  std::string text = out.str();
  std::istringstream wrong_version("draformer-checkpoint 99\n" + text.substr(text.find('\n') + 1));
  CHECK_THROWS_AS(read_checkpoint(wrong_version), FormatError);
  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(truncated), FormatError);
}

TEST_CASE("svg output is a well-formed document") {
  Matrix history(5, 1), actual(3, 1), predicted(3, 1);
  history << 1, 2, 3, 2, 1;
  actual << 0, 1, 2;
  predicted << 0.5, 1, 1.5;
  const std::string svg = prediction_svg("window <0> & more", history, actual, predicted, 0);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("&lt;0&gt; &amp; more") != std::string::npos);
  CHECK(svg.find("<0>") == std::string::npos);

  const std::string flat = line_plot_svg("flat", {{"c", "#000", {0, 1}, {2, 2}}});
  CHECK(flat.find("nan") == std::string::npos);
  CHECK(flat.find("inf") == std::string::npos);
}
