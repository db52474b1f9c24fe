#include "draformer/params.hpp"

#include "draformer/errors.hpp"

#include <cmath>

namespace draformer {

void ParamStore::add(const std::string& name, Matrix value) {
  if (values_.count(name) != 0) throw ConfigError("duplicate parameter name '" + name + "'");
  order_.push_back(name);
  values_.emplace(name, std::move(value));
}

bool ParamStore::contains(const std::string& name) const { return values_.count(name) != 0; }

const Matrix& ParamStore::get(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

Matrix& ParamStore::get_mut(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

void ParamStore::set(const std::string& name, const Matrix& value) {
  Matrix& slot = get_mut(name);
  if (slot.rows() != value.rows() || slot.cols() != value.cols()) {
    throw DimensionError("parameter '" + name + "' has shape " + shape_string(slot) +
                         ", got " + shape_string(value));
  }
  slot = value;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : values_) n += static_cast<std::size_t>(m.size());
  return n;
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (order_ != other.order_) return false;
  for (const auto& name : order_) {
    const Matrix& a = get(name);
    const Matrix& b = other.get(name);
    if (a.rows() != b.rows() || a.cols() != b.cols() || a != b) return false;
  }
  return true;
}

Matrix ParamInit::uniform_fan_in(Index rows, Index cols) {
  return uniform(rows, cols, 1.0 / std::sqrt(static_cast<double>(rows)));
}

Matrix ParamInit::uniform(Index rows, Index cols, double bound) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * unit_double(rng_) - 1.0) * bound;
  return m;
}

}  // namespace draformer
