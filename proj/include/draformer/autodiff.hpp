#pragma once

// Reverse-mode differentiation over a closed set of dense 2-D operations.
//
// A Tape owns every intermediate value of one forward pass. Operations are
// free functions taking and returning Var handles; each records a closure
// that maps the output gradient onto its inputs. Nodes that do not depend on
// any gradient-requiring leaf record no closure and are skipped by backward().

#include "draformer/params.hpp"
#include "draformer/tensor.hpp"

#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace draformer {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  bool requires_grad() const;
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Value that never receives a gradient.
  Var constant(Matrix value);
  /// Free leaf that receives a gradient.
  Var leaf(Matrix value);
  /// Leaf bound to a named parameter. Binding the same name twice returns the same Var.
  Var param(const ParamStore& store, const std::string& name);

  /// Records an operation result. A closure is kept only if some parent requires grad.
  Var record(Matrix value, std::initializer_list<Var> parents, Backward backward);
  Var record(Matrix value, const std::vector<Var>& parents, Backward backward);

  const Matrix& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id_)].value; }
  bool requires_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id_)].requires_grad; }

  /// Adds g to the gradient slot of v (no-op for constants).
  template <typename Expr>
  void accumulate(Var v, const Expr& g) {
    Node& n = nodes_[static_cast<std::size_t>(v.id_)];
    if (!n.requires_grad) return;
    if (!n.has_grad) {
      n.grad = g;
      n.has_grad = true;
    } else {
      n.grad += g;
    }
  }

  /// Back-propagates from a 1x1 root.
  void backward(Var root);

  /// Gradient of v; zeros if nothing reached it.
  Matrix grad(Var v) const;

  /// Gradient per parameter of the store; untouched parameters get exact zeros.
  GradMap param_grads(const ParamStore& store) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    Backward backward;
  };

  Var push(Matrix value, bool requires_grad, Backward backward);

  std::deque<Node> nodes_;
  std::unordered_map<std::string, int> bound_params_;
};

// ---- arithmetic --------------------------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Element-wise product.
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
/// Multiplies a by the 1x1 value s.
Var scale_by(Var a, Var s);
/// Adds the 1xC row to every row of a.
Var add_row(Var a, Var row);
/// out(i,j) = a(i,j) * col(i) for an Rx1 column.
Var mul_col(Var a, Var col);
/// out(i,j) = a(i,j) - col(i) for an Rx1 column.
Var sub_col(Var a, Var col);
Var sum(Var a);
Var mean(Var a);
Var transpose(Var a);

// ---- pointwise ---------------------------------------------------------

enum class Elementwise { elu, sigmoid, sqrt, log2, exp, softplus, square, reciprocal };

/// Pointwise function; throws DomainError naming the offending index for
/// sqrt of a negative, log2 of a non-positive, or reciprocal of zero.
Var elementwise(Var a, Elementwise kind);
Matrix elementwise(const Matrix& a, Elementwise kind);

inline Var elu(Var a) { return elementwise(a, Elementwise::elu); }
inline Var sigmoid(Var a) { return elementwise(a, Elementwise::sigmoid); }
inline Var sqrt(Var a) { return elementwise(a, Elementwise::sqrt); }
inline Var log2(Var a) { return elementwise(a, Elementwise::log2); }
inline Var exp(Var a) { return elementwise(a, Elementwise::exp); }
inline Var softplus(Var a) { return elementwise(a, Elementwise::softplus); }
inline Var square(Var a) { return elementwise(a, Elementwise::square); }
inline Var reciprocal(Var a) { return elementwise(a, Elementwise::reciprocal); }

// ---- normalisation -----------------------------------------------------

/// Row-wise softmax with max subtraction.
Var softmax_rows(Var a);
Matrix softmax_rows(const Matrix& a);
/// Row-wise softmax where entries (i, j) with j > i are excluded (weight 0).
Var softmax_rows_causal(Var a);
/// Per-row layer normalisation followed by gain and bias (each 1xC).
Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-5);

// ---- structure ---------------------------------------------------------

Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(Var a, Index start, Index count);
Var slice_cols(Var a, Index start, Index count);
/// Row-major reshape.
Var reshape(Var a, Index rows, Index cols);

/// 1-D convolution along rows without padding. x is T x C_in (time by
/// channel); weight is (kernel * C_in) x C_out with tap-major rows.
Var conv1d(Var x, Var weight, Index kernel, Index stride);
/// Max over non-overlapping groups of `kernel` adjacent columns.
Var maxpool_cols(Var a, Index kernel);

// ---- divergence and loss -----------------------------------------------

/// J(i,j) = JS(p_i, q_j) in bits for row distributions p (R x N) and q (S x N).
Var jensen_shannon_rows(Var p, Var q);
/// Mean squared error against a constant target.
Var mse_loss(Var pred, const Matrix& target);

}  // namespace draformer
