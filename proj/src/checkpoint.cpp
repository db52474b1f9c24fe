#include "draformer/checkpoint.hpp"

#include "draformer/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace draformer {

namespace {

constexpr const char* kMagic = "draformer-checkpoint";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_vector(std::ostream& out, const char* key, const Vector& v) {
  out << key;
  for (Index i = 0; i < v.size(); ++i) out << ' ' << fmt(v(i));
  out << '\n';
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(source_ + ":" + std::to_string(line_no_) + ": " + what);
  }

  double number(std::istringstream& is) const {
    std::string tok;
    if (!(is >> tok)) fail("missing number");
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) fail("bad number '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("bad number '" + tok + "'");
    }
  }

 private:
  std::istream& in_;
  std::string source_;
  Index line_no_ = 0;
};

Vector read_vector(Reader& r, std::istringstream& is) {
  std::vector<double> vals;
  while (is >> std::ws && !is.eof()) vals.push_back(r.number(is));
  Vector v(static_cast<Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v(static_cast<Index>(i)) = vals[i];
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  out << kMagic << ' ' << kCheckpointVersion << '\n';
  for (const auto& [key, value] : c.config.to_map()) out << "config " << key << ' ' << value << '\n';
  out << "n_vars " << c.n_vars << '\n';
  for (const auto& name : c.variables) out << "variable " << name << '\n';
  if (c.stats) {
    write_vector(out, "norm_mean", c.stats->mean);
    write_vector(out, "norm_scale", c.stats->scale);
  }
  out << "best_epoch " << c.best_epoch << '\n';
  out << "best_val_mse " << fmt(c.best_val_mse) << '\n';
  for (const auto& name : c.params.names()) {
    const Matrix& m = c.params.get(name);
    out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) out << (j > 0 ? " " : "") << fmt(m(i, j));
      out << '\n';
    }
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in, const std::string& source) {
  Reader r(in, source);
  std::string line;
  if (!r.next(line)) r.fail("empty checkpoint");
  {
    std::istringstream is(line);
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != kMagic) r.fail("not a checkpoint file");
    if (version != kCheckpointVersion) {
      r.fail("unsupported checkpoint version " + std::to_string(version) + " (expected " +
             std::to_string(kCheckpointVersion) + ")");
    }
  }
  Checkpoint c;
  std::map<std::string, std::string> config;
  Vector mean, scale;
  bool ended = false;
  while (r.next(line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string key;
    is >> key;
    if (key == "config") {
      std::string k, v;
      if (!(is >> k >> v)) r.fail("malformed config line");
      config[k] = v;
    } else if (key == "n_vars") {
      c.n_vars = static_cast<Index>(r.number(is));
    } else if (key == "variable") {
      c.variables.push_back(line.size() > 9 ? line.substr(9) : "");
    } else if (key == "norm_mean") {
      mean = read_vector(r, is);
    } else if (key == "norm_scale") {
      scale = read_vector(r, is);
    } else if (key == "best_epoch") {
      c.best_epoch = static_cast<Index>(r.number(is));
    } else if (key == "best_val_mse") {
      c.best_val_mse = r.number(is);
    } else if (key == "tensor") {
      std::string name;
      Index rows = 0, cols = 0;
      if (!(is >> name >> rows >> cols) || rows < 0 || cols < 0) r.fail("malformed tensor header");
      Matrix m(rows, cols);
      for (Index i = 0; i < rows; ++i) {
        if (!r.next(line)) r.fail("truncated tensor '" + name + "'");
        std::istringstream row(line);
        for (Index j = 0; j < cols; ++j) m(i, j) = r.number(row);
      }
      c.params.add(name, std::move(m));
    } else if (key == "end") {
      ended = true;
      break;
    } else {
      r.fail("unknown record '" + key + "'");
    }
  }
  if (!ended) r.fail("missing end marker");
  try {
    c.config = TrainConfig::from_map(config);
  } catch (const ConfigError& e) {
    throw FormatError(source + ": " + e.what());
  }
  if (mean.size() > 0 || scale.size() > 0) {
    if (mean.size() != scale.size()) throw FormatError(source + ": normalisation vectors differ in length");
    c.stats = NormStats{mean, scale};
  }
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_checkpoint(out, ckpt);
  if (!out) throw DataError("failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_checkpoint(in, path);
}

}  // namespace draformer
