// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/training/metrics.hpp"

#include <string>

#include "xlb/common/error.hpp"

namespace xlb::training {

F1Report macro_f1(std::span<const int> preds, std::span<const int> golds, std::size_t num_classes,
                  std::span<const std::uint8_t> mask) {
  if (preds.size() != golds.size()) throw DimensionError("macro_f1: prediction and gold counts differ");
  if (!mask.empty() && mask.size() != preds.size()) throw DimensionError("macro_f1: mask length mismatch");
  if (num_classes == 0) throw ContractError("macro_f1: empty label set");
  std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  F1Report rep;
  rep.support.assign(num_classes, 0);
  std::size_t n = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const int p = preds[i], g = golds[i];
    if (p < 0 || g < 0 || static_cast<std::size_t>(p) >= num_classes || static_cast<std::size_t>(g) >= num_classes)
      throw ContractError("macro_f1: label outside the label set at item " + std::to_string(i));
    ++n;
    ++rep.support[static_cast<std::size_t>(g)];
    if (p == g) {
      ++tp[static_cast<std::size_t>(p)];
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(g)];
    }
  }
  if (n == 0) throw ContractError("macro_f1: empty evaluation set");
  rep.per_class.resize(num_classes);
  double total = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    rep.per_class[c] = denom > 0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
    total += rep.per_class[c];
  }
  rep.macro = total / static_cast<double>(num_classes);
  return rep;
}

}  // namespace xlb::training
