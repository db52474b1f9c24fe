#pragma once

#include <Eigen/Dense>

#include <string>

namespace draformer {

/// Dense row-major matrix of doubles. Every tensor in the model is 2-D;
/// vectors are stored as single rows or single columns.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Tensor = Matrix;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

template <typename Derived>
std::string shape_string(const Eigen::EigenBase<Derived>& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline std::string shape_string(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace draformer
