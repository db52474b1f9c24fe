#include "draformer/autodiff.hpp"

#include "draformer/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace draformer {

const Matrix& Var::value() const { return tape_->value(*this); }

bool Var::requires_grad() const { return tape_->requires_grad(*this); }

Var Tape::push(Matrix value, bool requires_grad, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::leaf(Matrix value) { return push(std::move(value), true, nullptr); }

Var Tape::param(const ParamStore& store, const std::string& name) {
  auto it = bound_params_.find(name);
  if (it != bound_params_.end()) return Var(this, it->second);
  Var v = leaf(store.get(name));
  bound_params_.emplace(name, v.id_);
  return v;
}

Var Tape::record(Matrix value, std::initializer_list<Var> parents, Backward backward) {
  bool rg = false;
  for (const Var& p : parents) {
    if (p.tape_ != this) throw Error("operation mixes values from different tapes");
    rg = rg || requires_grad(p);
  }
  return push(std::move(value), rg, std::move(backward));
}

Var Tape::record(Matrix value, const std::vector<Var>& parents, Backward backward) {
  bool rg = false;
  for (const Var& p : parents) {
    if (p.tape_ != this) throw Error("operation mixes values from different tapes");
    rg = rg || requires_grad(p);
  }
  return push(std::move(value), rg, std::move(backward));
}

void Tape::backward(Var root) {
  if (root.tape_ != this) throw Error("backward root belongs to another tape");
  const Matrix& rv = value(root);
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw DimensionError("backward needs a 1x1 root, got " + shape_string(rv));
  }
  accumulate(root, Matrix::Ones(1, 1));
  for (int i = root.id_; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.has_grad && n.backward) n.backward(*this, n.grad);
  }
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id_)];
  if (n.has_grad) return n.grad;
  return Matrix::Zero(n.value.rows(), n.value.cols());
}

GradMap Tape::param_grads(const ParamStore& store) const {
  GradMap out;
  for (const auto& name : store.names()) {
    auto it = bound_params_.find(name);
    if (it == bound_params_.end()) {
      const Matrix& p = store.get(name);
      out.emplace(name, Matrix::Zero(p.rows(), p.cols()));
    } else {
      out.emplace(name, grad(Var(const_cast<Tape*>(this), it->second)));
    }
  }
  return out;
}

namespace {

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shapes " + shape_string(a) + " and " +
                         shape_string(b) + " differ");
  }
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw Error("operation on an unbound Var");
  return *a.tape();
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

const char* kind_name(Elementwise kind) {
  switch (kind) {
    case Elementwise::elu: return "elu";
    case Elementwise::sigmoid: return "sigmoid";
    case Elementwise::sqrt: return "sqrt";
    case Elementwise::log2: return "log2";
    case Elementwise::exp: return "exp";
    case Elementwise::softplus: return "softplus";
    case Elementwise::square: return "square";
    case Elementwise::reciprocal: return "reciprocal";
  }
  return "?";
}

void check_domain(const Matrix& a, Elementwise kind) {
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index c = 0; c < a.cols(); ++c) {
      const double x = a(r, c);
      bool bad = false;
      if (kind == Elementwise::sqrt) bad = !(x >= 0.0);
      if (kind == Elementwise::log2) bad = !(x > 0.0);
      if (kind == Elementwise::reciprocal) bad = (x == 0.0);
      if (bad) {
        throw DomainError(std::string(kind_name(kind)) + ": value " + std::to_string(x) +
                          " outside domain at index (" + std::to_string(r) + ", " +
                          std::to_string(c) + ")");
      }
    }
  }
}

Matrix apply(const Matrix& a, Elementwise kind) {
  Matrix y(a.rows(), a.cols());
  const double* in = a.data();
  double* out = y.data();
  const Index n = a.size();
  switch (kind) {
    case Elementwise::elu:
      for (Index i = 0; i < n; ++i) out[i] = in[i] > 0 ? in[i] : std::expm1(in[i]);
      break;
    case Elementwise::sigmoid:
      for (Index i = 0; i < n; ++i) out[i] = stable_sigmoid(in[i]);
      break;
    case Elementwise::sqrt:
      for (Index i = 0; i < n; ++i) out[i] = std::sqrt(in[i]);
      break;
    case Elementwise::log2:
      for (Index i = 0; i < n; ++i) out[i] = std::log2(in[i]);
      break;
    case Elementwise::exp:
      for (Index i = 0; i < n; ++i) out[i] = std::exp(in[i]);
      break;
    case Elementwise::softplus:
      for (Index i = 0; i < n; ++i) out[i] = stable_softplus(in[i]);
      break;
    case Elementwise::square:
      for (Index i = 0; i < n; ++i) out[i] = in[i] * in[i];
      break;
    case Elementwise::reciprocal:
      for (Index i = 0; i < n; ++i) out[i] = 1.0 / in[i];
      break;
  }
  return y;
}

// dy/dx given input x and output y.
Matrix derivative(const Matrix& x, const Matrix& y, Elementwise kind) {
  Matrix d(x.rows(), x.cols());
  const double* xi = x.data();
  const double* yi = y.data();
  double* di = d.data();
  const Index n = x.size();
  switch (kind) {
    case Elementwise::elu:
      for (Index i = 0; i < n; ++i) di[i] = xi[i] > 0 ? 1.0 : yi[i] + 1.0;
      break;
    case Elementwise::sigmoid:
      for (Index i = 0; i < n; ++i) di[i] = yi[i] * (1.0 - yi[i]);
      break;
    case Elementwise::sqrt:
      // Subgradient 0 at the origin keeps zero-variance rows finite.
      for (Index i = 0; i < n; ++i) di[i] = yi[i] > 0 ? 0.5 / yi[i] : 0.0;
      break;
    case Elementwise::log2:
      for (Index i = 0; i < n; ++i) di[i] = 1.0 / (xi[i] * std::numbers::ln2);
      break;
    case Elementwise::exp:
      for (Index i = 0; i < n; ++i) di[i] = yi[i];
      break;
    case Elementwise::softplus:
      for (Index i = 0; i < n; ++i) di[i] = stable_sigmoid(xi[i]);
      break;
    case Elementwise::square:
      for (Index i = 0; i < n; ++i) di[i] = 2.0 * xi[i];
      break;
    case Elementwise::reciprocal:
      for (Index i = 0; i < n; ++i) di[i] = -yi[i] * yi[i];
      break;
  }
  return d;
}

Matrix softmax_value(const Matrix& a, bool causal) {
  if (a.cols() == 0) throw DimensionError("softmax_rows: rows must be non-empty");
  Matrix y = Matrix::Zero(a.rows(), a.cols());
  for (Index r = 0; r < a.rows(); ++r) {
    const Index width = causal ? std::min<Index>(r + 1, a.cols()) : a.cols();
    const double m = a.row(r).head(width).maxCoeff();
    double total = 0.0;
    for (Index c = 0; c < width; ++c) {
      const double e = std::exp(a(r, c) - m);
      y(r, c) = e;
      total += e;
    }
    y.row(r).head(width) /= total;
  }
  return y;
}

}  // namespace

// ---- arithmetic --------------------------------------------------------

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul: inner dimensions disagree for " + shape_string(av) + " and " +
                         shape_string(bv));
  }
  Matrix y = av * bv;
  return t.record(std::move(y), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (a.requires_grad()) t.accumulate(a, g * b.value().transpose());
    if (b.requires_grad()) t.accumulate(b, a.value().transpose() * g);
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape("add", a.value(), b.value());
  return t.record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape("sub", a.value(), b.value());
  return t.record(a.value() - b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape("mul", a.value(), b.value());
  Matrix y = a.value().cwiseProduct(b.value());
  return t.record(std::move(y), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (a.requires_grad()) t.accumulate(a, g.cwiseProduct(b.value()));
    if (b.requires_grad()) t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  return t.record(a.value() * s, {a}, [a, s](Tape& t, const Matrix& g) { t.accumulate(a, g * s); });
}

Var add_scalar(Var a, double s) {
  Tape& t = tape_of(a);
  Matrix y = a.value().array() + s;
  return t.record(std::move(y), {a}, [a](Tape& t, const Matrix& g) { t.accumulate(a, g); });
}

Var scale_by(Var a, Var s) {
  Tape& t = tape_of(a);
  if (s.rows() != 1 || s.cols() != 1) {
    throw DimensionError("scale_by: scale must be 1x1, got " + shape_string(s.value()));
  }
  Matrix y = a.value() * s.value()(0, 0);
  return t.record(std::move(y), {a, s}, [a, s](Tape& t, const Matrix& g) {
    if (a.requires_grad()) t.accumulate(a, g * s.value()(0, 0));
    if (s.requires_grad()) {
      Matrix gs(1, 1);
      gs(0, 0) = g.cwiseProduct(a.value()).sum();
      t.accumulate(s, gs);
    }
  });
}

Var add_row(Var a, Var row) {
  Tape& t = tape_of(a);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DimensionError("add_row: row " + shape_string(row.value()) + " does not broadcast over " +
                         shape_string(a.value()));
  }
  Matrix y = a.value().rowwise() + row.value().row(0);
  return t.record(std::move(y), {a, row}, [a, row](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (row.requires_grad()) t.accumulate(row, g.colwise().sum());
  });
}

Var mul_col(Var a, Var col) {
  Tape& t = tape_of(a);
  if (col.cols() != 1 || col.rows() != a.rows()) {
    throw DimensionError("mul_col: column " + shape_string(col.value()) +
                         " does not broadcast over " + shape_string(a.value()));
  }
  Matrix y = col.value().col(0).asDiagonal() * a.value();
  return t.record(std::move(y), {a, col}, [a, col](Tape& t, const Matrix& g) {
    if (a.requires_grad()) t.accumulate(a, col.value().col(0).asDiagonal() * g);
    if (col.requires_grad()) t.accumulate(col, g.cwiseProduct(a.value()).rowwise().sum());
  });
}

Var sub_col(Var a, Var col) {
  Tape& t = tape_of(a);
  if (col.cols() != 1 || col.rows() != a.rows()) {
    throw DimensionError("sub_col: column " + shape_string(col.value()) +
                         " does not broadcast over " + shape_string(a.value()));
  }
  Matrix y = a.value().colwise() - col.value().col(0);
  return t.record(std::move(y), {a, col}, [a, col](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (col.requires_grad()) t.accumulate(col, -g.rowwise().sum());
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  Matrix y(1, 1);
  y(0, 0) = a.value().sum();
  return t.record(std::move(y), {a}, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var mean(Var a) {
  const auto n = static_cast<double>(a.value().size());
  return scale(sum(a), 1.0 / n);
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  Matrix y = a.value().transpose();
  return t.record(std::move(y), {a}, [a](Tape& t, const Matrix& g) { t.accumulate(a, g.transpose()); });
}

// ---- pointwise ---------------------------------------------------------

Matrix elementwise(const Matrix& a, Elementwise kind) {
  check_domain(a, kind);
  return apply(a, kind);
}

Var elementwise(Var a, Elementwise kind) {
  Tape& t = tape_of(a);
  Matrix y = elementwise(a.value(), kind);
  Matrix dydx;
  if (a.requires_grad()) dydx = derivative(a.value(), y, kind);
  return t.record(std::move(y), {a}, [a, dydx = std::move(dydx)](Tape& t, const Matrix& g) {
    t.accumulate(a, g.cwiseProduct(dydx));
  });
}

// ---- normalisation -----------------------------------------------------

Matrix softmax_rows(const Matrix& a) { return softmax_value(a, false); }

namespace {

Var softmax_var(Var a, bool causal) {
  Tape& t = tape_of(a);
  Matrix y = softmax_value(a.value(), causal);
  // The closure needs the output; keep a copy so no self-reference is required.
  Matrix y_copy = y;
  return t.record(std::move(y), {a}, [a, y_copy = std::move(y_copy)](Tape& t, const Matrix& g) {
    const Eigen::VectorXd dots = g.cwiseProduct(y_copy).rowwise().sum();
    Matrix ga = y_copy.cwiseProduct(g.colwise() - dots);
    t.accumulate(a, ga);
  });
}

}  // namespace

Var softmax_rows(Var a) { return softmax_var(a, false); }

Var softmax_rows_causal(Var a) { return softmax_var(a, true); }

Var layer_norm(Var a, Var gain, Var bias, double eps) {
  Tape& t = tape_of(a);
  const Matrix& x = a.value();
  const Index C = x.cols();
  if (gain.rows() != 1 || gain.cols() != C || bias.rows() != 1 || bias.cols() != C) {
    throw DimensionError("layer_norm: gain/bias must be 1x" + std::to_string(C));
  }
  const Eigen::VectorXd mu = x.rowwise().mean();
  Matrix centered = x.colwise() - mu;
  const Eigen::VectorXd var = centered.cwiseAbs2().rowwise().mean();
  const Eigen::VectorXd inv_std = (var.array() + eps).rsqrt();
  Matrix xhat = inv_std.asDiagonal() * centered;
  Matrix y = (xhat.array().rowwise() * gain.value().row(0).array()).matrix();
  y.rowwise() += bias.value().row(0);
  return t.record(std::move(y), {a, gain, bias},
                  [a, gain, bias, xhat = std::move(xhat), inv_std](Tape& t, const Matrix& g) {
                    if (gain.requires_grad()) t.accumulate(gain, g.cwiseProduct(xhat).colwise().sum());
                    if (bias.requires_grad()) t.accumulate(bias, g.colwise().sum());
                    if (a.requires_grad()) {
                      const double n = static_cast<double>(xhat.cols());
                      Matrix gx = (g.array().rowwise() * gain.value().row(0).array()).matrix();
                      const Eigen::VectorXd m1 = gx.rowwise().sum() / n;
                      const Eigen::VectorXd m2 = gx.cwiseProduct(xhat).rowwise().sum() / n;
                      Matrix ga = gx.colwise() - m1;
                      ga -= m2.asDiagonal() * xhat;
                      ga = inv_std.asDiagonal() * ga;
                      t.accumulate(a, ga);
                    }
                  });
}

// ---- structure ---------------------------------------------------------

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  Tape& t = tape_of(parts.front());
  const Index cols = parts.front().cols();
  Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) {
      throw DimensionError("concat_rows: column counts differ (" + shape_string(parts.front().value()) +
                           " vs " + shape_string(p.value()) + ")");
    }
    rows += p.rows();
  }
  Matrix y(rows, cols);
  Index r = 0;
  for (const Var& p : parts) {
    y.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return t.record(std::move(y), parts, [parts](Tape& t, const Matrix& g) {
    Index r = 0;
    for (const Var& p : parts) {
      if (p.requires_grad()) t.accumulate(p, g.middleRows(r, p.rows()));
      r += p.rows();
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  Tape& t = tape_of(parts.front());
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row counts differ (" + shape_string(parts.front().value()) +
                           " vs " + shape_string(p.value()) + ")");
    }
    cols += p.cols();
  }
  Matrix y(rows, cols);
  Index c = 0;
  for (const Var& p : parts) {
    y.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return t.record(std::move(y), parts, [parts](Tape& t, const Matrix& g) {
    Index c = 0;
    for (const Var& p : parts) {
      if (p.requires_grad()) t.accumulate(p, g.middleCols(c, p.cols()));
      c += p.cols();
    }
  });
}

Var slice_rows(Var a, Index start, Index count) {
  Tape& t = tape_of(a);
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(start) + ", " + std::to_string(start + count) +
                         ") out of range for " + shape_string(a.value()));
  }
  Matrix y = a.value().middleRows(start, count);
  return t.record(std::move(y), {a}, [a, start, count](Tape& t, const Matrix& g) {
    Matrix ga = Matrix::Zero(a.rows(), a.cols());
    ga.middleRows(start, count) = g;
    t.accumulate(a, ga);
  });
}

Var slice_cols(Var a, Index start, Index count) {
  Tape& t = tape_of(a);
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(start) + ", " + std::to_string(start + count) +
                         ") out of range for " + shape_string(a.value()));
  }
  Matrix y = a.value().middleCols(start, count);
  return t.record(std::move(y), {a}, [a, start, count](Tape& t, const Matrix& g) {
    Matrix ga = Matrix::Zero(a.rows(), a.cols());
    ga.middleCols(start, count) = g;
    t.accumulate(a, ga);
  });
}

Var reshape(Var a, Index rows, Index cols) {
  Tape& t = tape_of(a);
  if (rows * cols != a.value().size()) {
    throw DimensionError("reshape: cannot view " + shape_string(a.value()) + " as " +
                         shape_string(rows, cols));
  }
  Matrix y = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  const Index r0 = a.rows();
  const Index c0 = a.cols();
  return t.record(std::move(y), {a}, [a, r0, c0](Tape& t, const Matrix& g) {
    t.accumulate(a, Eigen::Map<const Matrix>(g.data(), r0, c0));
  });
}

Var conv1d(Var x, Var weight, Index kernel, Index stride) {
  Tape& t = tape_of(x);
  const Matrix& xv = x.value();
  const Index T = xv.rows();
  const Index cin = xv.cols();
  if (kernel < 1 || stride < 1) throw DimensionError("conv1d: kernel and stride must be positive");
  if (weight.rows() != kernel * cin) {
    throw DimensionError("conv1d: weight " + shape_string(weight.value()) + " does not match kernel " +
                         std::to_string(kernel) + " over " + std::to_string(cin) + " channels");
  }
  if (T < kernel) {
    throw DimensionError("conv1d: input length " + std::to_string(T) + " shorter than kernel " +
                         std::to_string(kernel));
  }
  const Index out_len = (T - kernel) / stride + 1;
  Matrix patches(out_len, kernel * cin);
  for (Index o = 0; o < out_len; ++o) {
    for (Index k = 0; k < kernel; ++k) patches.block(o, k * cin, 1, cin) = xv.row(o * stride + k);
  }
  Matrix y = patches * weight.value();
  return t.record(std::move(y), {x, weight},
                  [x, weight, kernel, stride, out_len, cin, patches = std::move(patches)](Tape& t,
                                                                                           const Matrix& g) {
                    if (weight.requires_grad()) t.accumulate(weight, patches.transpose() * g);
                    if (x.requires_grad()) {
                      const Matrix gp = g * weight.value().transpose();
                      Matrix gx = Matrix::Zero(x.rows(), x.cols());
                      for (Index o = 0; o < out_len; ++o) {
                        for (Index k = 0; k < kernel; ++k) gx.row(o * stride + k) += gp.block(o, k * cin, 1, cin);
                      }
                      t.accumulate(x, gx);
                    }
                  });
}

Var maxpool_cols(Var a, Index kernel) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  if (kernel < 1 || av.cols() % kernel != 0) {
    throw DimensionError("maxpool_cols: kernel " + std::to_string(kernel) + " does not divide " +
                         std::to_string(av.cols()) + " columns");
  }
  const Index out_cols = av.cols() / kernel;
  Matrix y(av.rows(), out_cols);
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> arg(av.rows(), out_cols);
  for (Index r = 0; r < av.rows(); ++r) {
    for (Index c = 0; c < out_cols; ++c) {
      Index best = c * kernel;
      for (Index k = 1; k < kernel; ++k) {
        if (av(r, c * kernel + k) > av(r, best)) best = c * kernel + k;
      }
      arg(r, c) = best;
      y(r, c) = av(r, best);
    }
  }
  return t.record(std::move(y), {a}, [a, arg = std::move(arg)](Tape& t, const Matrix& g) {
    Matrix ga = Matrix::Zero(a.rows(), a.cols());
    for (Index r = 0; r < g.rows(); ++r) {
      for (Index c = 0; c < g.cols(); ++c) ga(r, arg(r, c)) += g(r, c);
    }
    t.accumulate(a, ga);
  });
}

// ---- divergence and loss -----------------------------------------------

Var jensen_shannon_rows(Var p, Var q) {
  Tape& t = tape_of(p);
  const Matrix& pv = p.value();
  const Matrix& qv = q.value();
  if (pv.cols() != qv.cols()) {
    throw DimensionError("jensen_shannon_rows: supports differ (" + shape_string(pv) + " vs " +
                         shape_string(qv) + ")");
  }
  const Index R = pv.rows();
  const Index S = qv.rows();
  const Index N = pv.cols();
  Matrix j(R, S);
  for (Index i = 0; i < R; ++i) {
    for (Index k = 0; k < S; ++k) {
      double acc = 0.0;
      for (Index n = 0; n < N; ++n) {
        const double a = pv(i, n);
        const double b = qv(k, n);
        // p / m written as 2p / (p + q): m underflows for denormal p, q.
        if (a > 0) acc += a * std::log2(2.0 * a / (a + b));
        if (b > 0) acc += b * std::log2(2.0 * b / (a + b));
      }
      j(i, k) = 0.5 * acc;
    }
  }
  return t.record(std::move(j), {p, q}, [p, q](Tape& t, const Matrix& g) {
    const Matrix& pv = p.value();
    const Matrix& qv = q.value();
    const Index R = pv.rows();
    const Index S = qv.rows();
    const Index N = pv.cols();
    Matrix gp = Matrix::Zero(R, N);
    Matrix gq = Matrix::Zero(S, N);
    // dJ/dp_n = 0.5 * log2(p_n / m_n), dJ/dq_n = 0.5 * log2(q_n / m_n).
    for (Index i = 0; i < R; ++i) {
      for (Index k = 0; k < S; ++k) {
        const double w = 0.5 * g(i, k);
        if (w == 0.0) continue;
        for (Index n = 0; n < N; ++n) {
          const double a = pv(i, n);
          const double b = qv(k, n);
          if (a > 0) gp(i, n) += w * std::log2(2.0 * a / (a + b));
          if (b > 0) gq(k, n) += w * std::log2(2.0 * b / (a + b));
        }
      }
    }
    if (p.requires_grad()) t.accumulate(p, gp);
    if (q.requires_grad()) t.accumulate(q, gq);
  });
}

Var mse_loss(Var pred, const Matrix& target) {
  Tape& t = tape_of(pred);
  require_same_shape("mse_loss", pred.value(), target);
  Matrix diff = pred.value() - target;
  const double n = static_cast<double>(diff.size());
  Matrix y(1, 1);
  y(0, 0) = diff.squaredNorm() / n;
  return t.record(std::move(y), {pred}, [pred, diff = std::move(diff), n](Tape& t, const Matrix& g) {
    t.accumulate(pred, diff * (2.0 * g(0, 0) / n));
  });
}

}  // namespace draformer
