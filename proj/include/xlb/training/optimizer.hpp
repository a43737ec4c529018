// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_TRAINING_OPTIMIZER_HPP
#define XLB_TRAINING_OPTIMIZER_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "xlb/model/params.hpp"

namespace xlb::training {

struct AdamWSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment estimates per parameter plus the shared step count.
struct AdamWState {
  std::size_t step = 0;
  std::unordered_map<std::string, std::vector<double>> m, v;
};

/**
 * One AdamW update over every parameter holding a gradient. Moments are kept
 * in double. Weight decay is decoupled: p -= lr * wd * p before the adaptive
 * step. Parameters without a gradient buffer are only decayed.
 */
template <typename T>
void adamw_step(model::ParamStore<T>& params, AdamWState& state, double lr, double weight_decay,
                const AdamWSettings& s = {});

}  // namespace xlb::training

#endif  // XLB_TRAINING_OPTIMIZER_HPP
