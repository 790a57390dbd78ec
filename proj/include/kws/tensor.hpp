#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace kws {

namespace detail {
struct TensorImpl;
}

/// Dense row-major tensor with reverse-mode autodiff. A Tensor is a cheap
/// handle onto a shared node; ops build a DAG of nodes and backward() on a
/// scalar output accumulates gradients into every reachable requires-grad
/// leaf exactly once.
///
/// Values are immutable once a tensor has entered a graph, except for leaf
/// value updates between training steps (sgd) and grad accumulation.
class Tensor {
 public:
  Tensor() = default;  // undefined tensor

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
  static Tensor from_values(std::vector<int> shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl != nullptr; }
  const std::vector<int>& shape() const;
  int rank() const;
  std::size_t size() const;  // element count
  int rows() const;          // rank-2 only
  int cols() const;          // rank-2 only

  double at(std::size_t flat_index) const;
  double at(int r, int c) const;
  double scalar_value() const;  // rank-0 or single-element

  std::vector<double>& values();  // leaf initialization / parameter updates
  const std::vector<double>& values() const;

  bool requires_grad() const;
  bool has_grad() const;
  const std::vector<double>& grad() const;
  void zero_grad();

  /// Reverse-mode sweep from a scalar output. Zeroes the grads of every
  /// reachable node first, then accumulates. Throws ContractError if the
  /// output is not a single element.
  void backward() const;

  std::shared_ptr<detail::TensorImpl> impl;
};

namespace detail {

struct TensorImpl {
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grad;  // sized lazily by backward()
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorImpl>> parents;
  std::function<void(TensorImpl&)> backward_fn;  // reads grad, writes parents' grads
};

std::size_t numel(const std::vector<int>& shape);

}  // namespace detail

/// True while gradient recording is enabled (default). Ops skip node
/// construction entirely when disabled, which makes inference pure and cheap.
bool grad_enabled();

struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

}  // namespace kws
