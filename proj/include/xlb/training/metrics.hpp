// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_TRAINING_METRICS_HPP
#define XLB_TRAINING_METRICS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace xlb::training {

struct F1Report {
  double macro = 0.0;
  std::vector<double> per_class;
  std::vector<std::size_t> support;  // gold count per class
};

/**
 * Unweighted mean of per-class F1 over all `num_classes` classes. A class
 * with no predictions and no gold instances scores 0. `mask` may be empty.
 * Throws ContractError on an empty evaluation set.
 */
F1Report macro_f1(std::span<const int> preds, std::span<const int> golds, std::size_t num_classes,
                  std::span<const std::uint8_t> mask = {});

}  // namespace xlb::training

#endif  // XLB_TRAINING_METRICS_HPP
