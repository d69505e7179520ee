#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace hgl {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ')';
  return os.str();
}

inline void op_check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

/// Dense n-dimensional array of T with an optional gradient buffer and the
/// lineage needed for reverse-mode differentiation. A Tensor is a shared
/// handle: copies alias the same storage and graph node. Layout is row-major
/// contiguous, NCHW for image data.
template <typename T>
class Tensor {
 public:
  struct Node {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;  // sized on first backward touch, then persistent
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Chain-rule step for this node. Owned by the node; raw parent pointers
    // captured inside stay valid because `parents` keeps them alive.
    std::function<void()> backprop;

    void ensure_grad() {
      if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    }
  };

  Tensor() = default;

  static Tensor zeros(Shape shape) {
    return from_data(std::move(shape), {});
  }

  static Tensor full(Shape shape, T value) {
    Tensor t;
    t.n_ = std::make_shared<Node>();
    t.n_->data.assign(shape_numel(shape), value);
    t.n_->shape = std::move(shape);
    return t;
  }

  static Tensor scalar(T value) { return full({}, value); }

  static Tensor from_data(Shape shape, std::vector<T> data) {
    Tensor t;
    t.n_ = std::make_shared<Node>();
    std::size_t n = shape_numel(shape);
    if (data.empty()) data.assign(n, T(0));
    op_check(data.size() == n, "tensor data length " + std::to_string(data.size()) +
                                   " does not match shape " + shape_str(shape));
    t.n_->shape = std::move(shape);
    t.n_->data = std::move(data);
    return t;
  }

  bool defined() const { return static_cast<bool>(n_); }
  const Shape& shape() const { return n_->shape; }
  std::size_t dim(std::size_t i) const { return n_->shape.at(i); }
  std::size_t ndim() const { return n_->shape.size(); }
  std::size_t numel() const { return n_->data.size(); }

  std::vector<T>& data() { return n_->data; }
  const std::vector<T>& data() const { return n_->data; }
  std::vector<T>& grad() { return n_->grad; }
  const std::vector<T>& grad() const { return n_->grad; }

  bool requires_grad() const { return n_ && n_->requires_grad; }
  Tensor& set_requires_grad(bool b) {
    n_->requires_grad = b;
    return *this;
  }

  void zero_grad() {
    if (n_) n_->grad.assign(n_->data.size(), T(0));
  }

  T item() const {
    op_check(numel() == 1, "item() on tensor of shape " + shape_str(shape()));
    return n_->data[0];
  }

  T& at(std::initializer_list<std::size_t> idx) {
    return n_->data[flat_index(idx)];
  }
  const T& at(std::initializer_list<std::size_t> idx) const {
    return n_->data[flat_index(idx)];
  }

  /// Copy of the values with no lineage and no gradient.
  Tensor detach() const { return from_data(n_->shape, n_->data); }

  /// Same storage reinterpreted under a new shape of equal element count.
  /// No lineage: intended for non-differentiated reshuffling only.
  Tensor reshaped(Shape shape) const {
    op_check(shape_numel(shape) == numel(),
             "reshape " + shape_str(n_->shape) + " -> " + shape_str(shape));
    Tensor t;
    t.n_ = std::make_shared<Node>();
    t.n_->shape = std::move(shape);
    t.n_->data = n_->data;
    return t;
  }

  std::shared_ptr<Node> node() const { return n_; }

  /// Builds an op result wired into the graph. `fn` must add into the
  /// parents' grad buffers, reading this node's grad.
  static Tensor make_op(Shape shape, std::vector<T> data,
                        std::vector<Tensor> parents,
                        std::function<void(Node&)> fn) {
    Tensor t = from_data(std::move(shape), std::move(data));
    bool needs = false;
    for (const auto& p : parents) {
      t.n_->parents.push_back(p.n_);
      needs = needs || p.requires_grad();
    }
    t.n_->requires_grad = needs;
    if (needs && fn) {
      Node* self = t.n_.get();
      t.n_->backprop = [self, fn]() { fn(*self); };
    }
    return t;
  }

 private:
  std::size_t flat_index(std::initializer_list<std::size_t> idx) const {
    op_check(idx.size() == n_->shape.size(), "index rank mismatch");
    std::size_t flat = 0, i = 0;
    for (auto v : idx) {
      flat = flat * n_->shape[i] + v;
      ++i;
    }
    return flat;
  }

  std::shared_ptr<Node> n_;
};

/// Reverse-mode sweep from a scalar loss. Gradients accumulate into every
/// requires-grad tensor reachable through the lineage; repeated calls keep
/// accumulating until grads are explicitly zeroed.
template <typename T>
void backward(const Tensor<T>& loss) {
  op_check(loss.defined() && loss.numel() == 1,
           "backward() requires a scalar loss, got shape " +
               (loss.defined() ? shape_str(loss.shape()) : std::string("<empty>")));
  using Node = typename Tensor<T>::Node;

  // Iterative post-order topological sort; graphs can be thousands of nodes deep.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->ensure_grad();
  loss.node()->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backprop) (*it)->backprop();
  }
}

}  // namespace hgl
