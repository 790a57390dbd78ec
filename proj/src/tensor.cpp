#include "kws/tensor.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "kws/errors.hpp"

namespace kws {

namespace detail {

std::size_t numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative dimension in shape");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace detail

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
  Tensor t;
  t.impl = std::make_shared<detail::TensorImpl>();
  std::size_t n = detail::numel(shape);
  t.impl->shape = std::move(shape);
  t.impl->values.assign(n, value);
  t.impl->requires_grad = requires_grad && grad_enabled();
  return t;
}

Tensor Tensor::from_values(std::vector<int> shape, std::vector<double> values,
                           bool requires_grad) {
  if (detail::numel(shape) != values.size()) {
    throw ShapeError("from_values: shape does not match value count");
  }
  Tensor t;
  t.impl = std::make_shared<detail::TensorImpl>();
  t.impl->shape = std::move(shape);
  t.impl->values = std::move(values);
  t.impl->requires_grad = requires_grad && grad_enabled();
  return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_values({}, {value}, requires_grad);
}

const std::vector<int>& Tensor::shape() const { return impl->shape; }

int Tensor::rank() const { return static_cast<int>(impl->shape.size()); }

std::size_t Tensor::size() const { return impl->values.size(); }

int Tensor::rows() const {
  if (rank() != 2) throw ShapeError("rows(): tensor is not rank-2");
  return impl->shape[0];
}

int Tensor::cols() const {
  if (rank() != 2) throw ShapeError("cols(): tensor is not rank-2");
  return impl->shape[1];
}

double Tensor::at(std::size_t flat_index) const { return impl->values.at(flat_index); }

double Tensor::at(int r, int c) const {
  return impl->values.at(static_cast<std::size_t>(r) * cols() + c);
}

double Tensor::scalar_value() const {
  if (size() != 1) throw ContractError("scalar_value(): tensor has more than one element");
  return impl->values[0];
}

std::vector<double>& Tensor::values() { return impl->values; }
const std::vector<double>& Tensor::values() const { return impl->values; }

bool Tensor::requires_grad() const { return impl->requires_grad; }

bool Tensor::has_grad() const { return !impl->grad.empty(); }

const std::vector<double>& Tensor::grad() const {
  if (impl->grad.empty()) throw ContractError("grad(): no gradient populated");
  return impl->grad;
}

void Tensor::zero_grad() { impl->grad.assign(impl->values.size(), 0.0); }

void Tensor::backward() const {
  if (!impl) throw ContractError("backward(): undefined tensor");
  if (size() != 1) {
    throw ContractError("backward(): output has " + std::to_string(size()) +
                        " elements, expected a scalar");
  }

  // Iterative post-order DFS. GRU chains can get long, so no recursion.
  std::vector<detail::TensorImpl*> order;
  std::unordered_set<detail::TensorImpl*> seen;
  struct Frame {
    detail::TensorImpl* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  if (impl->requires_grad) {
    stack.push_back({impl.get(), 0});
    seen.insert(impl.get());
  }
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      detail::TensorImpl* p = f.node->parents[f.next_parent++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  for (detail::TensorImpl* node : order) {
    node->grad.assign(node->values.size(), 0.0);
  }
  if (order.empty()) return;  // output does not require grad: nothing to do
  impl->grad[0] = 1.0;

  // `order` is post-order, so children come after all their parents were
  // visited; reverse iteration runs each node before its inputs.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::TensorImpl* node = *it;
    if (node->backward_fn) node->backward_fn(*node);
  }
}

}  // namespace kws
