#include "gpsl/tensor.hpp"

#include <algorithm>
#include <stdexcept>

namespace gpsl::diff {

Tensor& ParameterStore::add(const std::string& name, int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("ParameterStore::add: bad shape for " + name);
  if (params_.count(name)) throw std::invalid_argument("ParameterStore::add: duplicate name " + name);
  Tensor t;
  t.rows = rows;
  t.cols = cols;
  t.value.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  t.grad.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  return params_.emplace(name, std::move(t)).first->second;
}

Tensor& ParameterStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::invalid_argument("ParameterStore: unknown parameter " + name);
  return it->second;
}

const Tensor& ParameterStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::invalid_argument("ParameterStore: unknown parameter " + name);
  return it->second;
}

bool ParameterStore::contains(const std::string& name) const { return params_.count(name) != 0; }

void ParameterStore::remove(const std::string& name) {
  if (!params_.erase(name)) throw std::invalid_argument("ParameterStore::remove: unknown parameter " + name);
}

void ParameterStore::clone_prefix(const std::string& src_prefix, const std::string& dst_prefix) {
  for (const auto& name : names_with_prefix(src_prefix)) {
    const Tensor& src = params_.at(name);
    std::string dst_name = dst_prefix + name.substr(src_prefix.size());
    Tensor copy = src;
    std::fill(copy.grad.begin(), copy.grad.end(), 0.0);
    if (params_.count(dst_name)) throw std::invalid_argument("clone_prefix: destination exists: " + dst_name);
    params_.emplace(std::move(dst_name), std::move(copy));
  }
}

void ParameterStore::remove_prefix(const std::string& prefix) {
  for (const auto& name : names_with_prefix(prefix)) params_.erase(name);
}

std::vector<std::string> ParameterStore::names_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (auto it = params_.lower_bound(prefix); it != params_.end(); ++it) {
    if (it->first.compare(0, prefix.size(), prefix) != 0) break;
    out.push_back(it->first);
  }
  return out;
}

void ParameterStore::zero_grads() {
  for (auto& [name, t] : params_) std::fill(t.grad.begin(), t.grad.end(), 0.0);
}

std::size_t ParameterStore::total_size() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.size();
  return n;
}

}  // namespace gpsl::diff
