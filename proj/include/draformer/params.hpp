#pragma once

#include "draformer/tensor.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace draformer {

/// Named learnable matrices in declaration order.
class ParamStore {
 public:
  /// Registers a new parameter; throws ConfigError on duplicate names.
  void add(const std::string& name, Matrix value);

  bool contains(const std::string& name) const;
  const Matrix& get(const std::string& name) const;
  Matrix& get_mut(const std::string& name);
  void set(const std::string& name, const Matrix& value);

  const std::vector<std::string>& names() const { return order_; }
  std::size_t size() const { return order_.size(); }
  /// Total number of scalar entries across all parameters.
  std::size_t scalar_count() const;

  bool operator==(const ParamStore& other) const;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Matrix> values_;
};

using GradMap = std::map<std::string, Matrix>;

/// Uniform initialiser in [-1/sqrt(fan_in), 1/sqrt(fan_in)] with fan_in = rows.
class ParamInit {
 public:
  explicit ParamInit(std::uint64_t seed) : rng_(seed) {}

  Matrix uniform_fan_in(Index rows, Index cols);
  Matrix uniform(Index rows, Index cols, double bound);

 private:
  std::mt19937_64 rng_;
};

/// Double in [0, 1) from the top 53 bits of a 64-bit draw; identical on every
/// platform for a given engine state.
inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace draformer
