// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/training/optimizer.hpp"

#include <cmath>

namespace xlb::training {

template <typename T>
void adamw_step(model::ParamStore<T>& params, AdamWState& state, double lr, double weight_decay,
                const AdamWSettings& s) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  for (const auto& name : params.names()) {
    auto& p = params.at(name);
    const bool has_grad = p.has_grad();
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.empty()) {
      m.assign(p.size(), 0.0);
      v.assign(p.size(), 0.0);
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      double w = static_cast<double>(p[i]);
      w -= lr * weight_decay * w;
      const double g = has_grad ? static_cast<double>(p.grad()[i]) : 0.0;
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g;
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g * g;
      w -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + s.eps);
      p[i] = static_cast<T>(w);
    }
  }
}

template void adamw_step(model::ParamStore<float>&, AdamWState&, double, double, const AdamWSettings&);
template void adamw_step(model::ParamStore<double>&, AdamWState&, double, double, const AdamWSettings&);

}  // namespace xlb::training
