#pragma once

#include <map>
#include <string>

#include "kws/tensor.hpp"

namespace kws {

/// Registry of named trainable tensors. Iteration order is the lexical name
/// order (std::map), which fixes checkpoint layout and update order.
struct ParamStore {
  std::map<std::string, Tensor> entries;

  Tensor add(const std::string& name, Tensor t);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return entries.count(name) > 0; }

  std::size_t total_size() const;
  void sgd_step(double lr);
};

}  // namespace kws
