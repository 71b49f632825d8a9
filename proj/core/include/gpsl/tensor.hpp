#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gpsl::diff {

/// Dense row-major tensor (matrix or column vector) with a paired gradient
/// accumulator of identical shape.
struct Tensor {
  std::vector<double> value;
  std::vector<double> grad;
  int rows = 0;
  int cols = 1;

  std::size_t size() const { return value.size(); }
};

/// Named trainable parameters. Iteration order is the lexicographic name
/// order, which keeps every store traversal deterministic.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, int rows, int cols = 1);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  void remove(const std::string& name);

  /// Copies every tensor named `src_prefix...` to `dst_prefix...`.
  void clone_prefix(const std::string& src_prefix, const std::string& dst_prefix);
  void remove_prefix(const std::string& prefix);
  std::vector<std::string> names_with_prefix(const std::string& prefix) const;

  void zero_grads();
  std::size_t tensor_count() const { return params_.size(); }
  /// Total number of scalar parameters.
  std::size_t total_size() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::map<std::string, Tensor> params_;
};

}  // namespace gpsl::diff
