// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_NUMERICS_GRADCHECK_HPP
#define XLB_NUMERICS_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "xlb/numerics/tape.hpp"
#include "xlb/numerics/tensor.hpp"

namespace xlb::num {

/// Scalar-valued function of tensors it captures by handle.
using ScalarFn = std::function<Tensor<double>(Tape<double>&)>;

/**
 * Compares reverse-mode gradients with central differences.
 *
 * Returns max over coordinates of |analytic - numeric| / max(1, |analytic|)
 * across all `inputs`. Each input is perturbed in place and restored. `f`
 * must be deterministic (no dropout).
 */
inline double finite_diff_check(const ScalarFn& f, std::vector<Tensor<double>> inputs,
                                double h = 1e-5) {
  for (auto& x : inputs) {
    x.set_requires_grad(true);
    x.ensure_grad();
    x.zero_grad();
  }
  {
    Tape<double> tape;
    Tensor<double> loss = f(tape);
    tape.backward(loss);
  }
  double worst = 0.0;
  for (auto& x : inputs) {
    const std::vector<double> analytic(x.grad().begin(), x.grad().end());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + h;
      Tape<double> off(false);
      const double fp = f(off).item();
      x[i] = saved - h;
      const double fm = f(off).item();
      x[i] = saved;
      const double numeric = (fp - fm) / (2.0 * h);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

inline double finite_diff_check(const ScalarFn& f, Tensor<double> x, double h = 1e-5) {
  return finite_diff_check(f, std::vector<Tensor<double>>{std::move(x)}, h);
}

}  // namespace xlb::num

#endif  // XLB_NUMERICS_GRADCHECK_HPP
