// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/numerics/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "xlb/numerics/tape.hpp"

namespace xlb::num {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : node_(std::make_shared<Node>()) {
  node_->value.assign(numel(shape), fill);
  node_->shape = std::move(shape);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : node_(std::make_shared<Node>()) {
  if (numel(shape) != values.size()) {
    throw DimensionError("tensor shape " + shape_str(shape) + " does not hold " +
                         std::to_string(values.size()) + " values");
  }
  node_->shape = std::move(shape);
  node_->value = std::move(values);
}

template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

template <typename T>
std::span<T> Tensor<T>::ensure_grad() const {
  if (node_->grad.size() != node_->value.size()) node_->grad.assign(node_->value.size(), T{0});
  return node_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() const {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T{0});
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return Tensor(node_->shape, node_->value);
}

template <typename T>
void Tensor<T>::assign(std::span<const T> values) {
  if (values.size() != node_->value.size()) {
    throw DimensionError("assign of " + std::to_string(values.size()) + " values into " +
                         shape_str(node_->shape));
  }
  std::copy(values.begin(), values.end(), node_->value.begin());
}

template class Tensor<float>;
template class Tensor<double>;

template <typename T>
void Tape<T>::record(Tensor<T> output, std::function<void()> backward) {
  if (!enabled_) return;
  entries_.push_back(Entry{std::move(output), std::move(backward)});
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss");
  }
  for (auto& e : entries_) {
    e.output.ensure_grad();
    e.output.zero_grad();
  }
  Tensor<T> l = loss;
  if (!l.requires_grad()) return;
  l.ensure_grad()[0] += T{1};
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) it->backward();
}

template class Tape<float>;
template class Tape<double>;

}  // namespace xlb::num
