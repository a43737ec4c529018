// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_NUMERICS_TENSOR_HPP
#define XLB_NUMERICS_TENSOR_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "xlb/common/error.hpp"

namespace xlb::num {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/**
 * Dense row-major array with an optional gradient slot.
 *
 * A Tensor is a cheap handle: copies share storage. Values produced by an op
 * are never modified afterwards, except for parameters, which the optimizer
 * updates in place between steps.
 */
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0});
  Tensor(Shape shape, std::vector<T> values);

  static Tensor scalar(T v) { return Tensor(Shape{1}, std::vector<T>{v}); }

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t size() const { return node_->value.size(); }

  std::span<T> values() { return node_->value; }
  std::span<const T> values() const { return node_->value; }
  T* data() { return node_->value.data(); }
  const T* data() const { return node_->value.data(); }
  T& operator[](std::size_t i) { return node_->value[i]; }
  T operator[](std::size_t i) const { return node_->value[i]; }

  /// Value of a single-element tensor.
  T item() const;

  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
  Tensor& set_requires_grad(bool on = true) {
    node_->requires_grad = on;
    return *this;
  }

  bool has_grad() const noexcept { return node_ && !node_->grad.empty(); }
  std::span<T> grad() { return node_->grad; }
  std::span<const T> grad() const { return node_->grad; }
  // Gradient access follows handle semantics: a const handle still refers to
  // mutable shared storage, so backward closures can accumulate through it.
  /// Allocates a zeroed gradient buffer on first use.
  std::span<T> ensure_grad() const;
  void zero_grad() const;
  void drop_grad() { node_->grad.clear(); }

  /// Deep copy of the values; the copy has no gradient and does not require one.
  Tensor clone() const;
  /// Same shape, new values (for in-place parameter loading).
  void assign(std::span<const T> values);

  bool same_storage(const Tensor& other) const noexcept { return node_ == other.node_; }

 private:
  struct Node {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Node> node_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

/// Copy values between precisions (shape preserved).
template <typename To, typename From>
Tensor<To> cast(const Tensor<From>& t) {
  std::vector<To> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<To>(t[i]);
  return Tensor<To>(t.shape(), std::move(out));
}

}  // namespace xlb::num

#endif  // XLB_NUMERICS_TENSOR_HPP
