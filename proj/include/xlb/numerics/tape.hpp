// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_NUMERICS_TAPE_HPP
#define XLB_NUMERICS_TAPE_HPP

#include <functional>
#include <vector>

#include "xlb/numerics/tensor.hpp"

namespace xlb::num {

/**
 * Ordered record of differentiable operations.
 *
 * Ops append a backward closure together with the tensor they produced.
 * backward() clears the gradients of every recorded output, seeds the loss
 * with 1 and replays the closures in reverse order, so each closure runs
 * exactly once per call. Leaf gradients (parameters, inputs) accumulate;
 * callers zero them between steps.
 *
 * A disabled tape records nothing; use it for inference and for the
 * perturbed evaluations of finite-difference checks.
 */
template <typename T>
class Tape {
 public:
  explicit Tape(bool enabled = true) : enabled_(enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool enabled() const noexcept { return enabled_; }

  /// True when an op consuming `t` must record itself.
  bool tracks(const Tensor<T>& t) const noexcept { return enabled_ && t.requires_grad(); }

  void record(Tensor<T> output, std::function<void()> backward);

  void backward(const Tensor<T>& loss);

  std::size_t size() const noexcept { return entries_.size(); }
  void clear() { entries_.clear(); }

 private:
  struct Entry {
    Tensor<T> output;
    std::function<void()> backward;
  };
  bool enabled_;
  std::vector<Entry> entries_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace xlb::num

#endif  // XLB_NUMERICS_TAPE_HPP
