// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_TRAINING_LOSSES_HPP
#define XLB_TRAINING_LOSSES_HPP

#include <cstdint>
#include <span>

#include "xlb/numerics/tape.hpp"

namespace xlb::training {

/**
 * Mean over valid rows of -log softmax(logits)[label]. `logits` is [N, C];
 * `mask` may be empty (all rows valid). Labels of masked rows are ignored.
 * Throws ContractError when every row is masked or a valid label is out of range.
 */
template <typename T>
num::Tensor<T> cross_entropy_loss(num::Tape<T>& tape, const num::Tensor<T>& logits, std::span<const int> labels,
                                  std::span<const std::uint8_t> mask = {});

/**
 * Mean over valid rows of sum_c y_c (log y_c - log softmax(logits)_c), with
 * 0 log 0 = 0. `soft` is row-major [N, C]; valid rows must sum to 1 within 1e-6.
 */
template <typename T>
num::Tensor<T> kl_divergence_loss(num::Tape<T>& tape, const num::Tensor<T>& logits, std::span<const double> soft,
                                  std::span<const std::uint8_t> mask = {});

}  // namespace xlb::training

#endif  // XLB_TRAINING_LOSSES_HPP
