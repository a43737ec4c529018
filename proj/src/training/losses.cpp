// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/training/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "xlb/common/error.hpp"

namespace xlb::training {

using num::Tensor;

namespace {

template <typename T>
std::vector<double> log_softmax_rows(const Tensor<T>& logits, std::size_t n, std::size_t c) {
  std::vector<double> out(n * c);
  for (std::size_t r = 0; r < n; ++r) {
    const T* row = logits.data() + r * c;
    double mx = row[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(static_cast<double>(row[j]) - mx);
    const double lz = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) out[r * c + j] = static_cast<double>(row[j]) - lz;
  }
  return out;
}

template <typename T>
std::pair<std::size_t, std::size_t> check_logits(const Tensor<T>& logits, std::span<const std::uint8_t> mask) {
  if (logits.rank() != 2) throw DimensionError("loss: logits must be [N, C], got " + num::shape_str(logits.shape()));
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  if (!mask.empty() && mask.size() != n)
    throw DimensionError("loss: mask has " + std::to_string(mask.size()) + " entries for " + std::to_string(n) + " rows");
  return {n, c};
}

bool row_valid(std::span<const std::uint8_t> mask, std::size_t r) { return mask.empty() || mask[r] != 0; }

/// Shared backward: d loss / d logits[r] = (softmax - target) / valid_rows.
template <typename T>
Tensor<T> finish(num::Tape<T>& tape, const Tensor<T>& logits, double value, std::vector<double> target,
                 std::vector<double> logp, std::vector<std::uint8_t> valid, std::size_t count, std::size_t c) {
  Tensor<T> out = Tensor<T>::scalar(static_cast<T>(value));
  if (!tape.tracks(logits)) return out;
  out.set_requires_grad(true);
  tape.record(out, [logits, out, target = std::move(target), logp = std::move(logp), valid = std::move(valid), count,
                    c]() {
    auto g = logits.ensure_grad();
    const double upstream = static_cast<double>(out.grad()[0]) / static_cast<double>(count);
    for (std::size_t r = 0; r < valid.size(); ++r) {
      if (!valid[r]) continue;
      for (std::size_t j = 0; j < c; ++j)
        g[r * c + j] += static_cast<T>(upstream * (std::exp(logp[r * c + j]) - target[r * c + j]));
    }
  });
  return out;
}

}  // namespace

template <typename T>
Tensor<T> cross_entropy_loss(num::Tape<T>& tape, const Tensor<T>& logits, std::span<const int> labels,
                             std::span<const std::uint8_t> mask) {
  const auto [n, c] = check_logits(logits, mask);
  if (labels.size() != n) throw DimensionError("cross_entropy_loss: one label per row required");
  std::vector<std::uint8_t> valid(n);
  std::vector<double> target(n * c, 0.0);
  std::size_t count = 0;
  for (std::size_t r = 0; r < n; ++r) {
    valid[r] = row_valid(mask, r);
    if (!valid[r]) continue;
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= c)
      throw ContractError("cross_entropy_loss: label " + std::to_string(labels[r]) + " outside " + std::to_string(c) +
                          " classes");
    target[r * c + static_cast<std::size_t>(labels[r])] = 1.0;
    ++count;
  }
  if (count == 0) throw ContractError("cross_entropy_loss: every row is masked");
  auto logp = log_softmax_rows(logits, n, c);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    if (valid[r]) total -= logp[r * c + static_cast<std::size_t>(labels[r])];
  return finish(tape, logits, total / static_cast<double>(count), std::move(target), std::move(logp),
                std::move(valid), count, c);
}

template <typename T>
Tensor<T> kl_divergence_loss(num::Tape<T>& tape, const Tensor<T>& logits, std::span<const double> soft,
                             std::span<const std::uint8_t> mask) {
  const auto [n, c] = check_logits(logits, mask);
  if (soft.size() != n * c) throw DimensionError("kl_divergence_loss: soft labels must be [N, C]");
  std::vector<std::uint8_t> valid(n);
  std::size_t count = 0;
  for (std::size_t r = 0; r < n; ++r) {
    valid[r] = row_valid(mask, r);
    if (!valid[r]) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (soft[r * c + j] < 0.0) throw ContractError("kl_divergence_loss: negative soft label");
      s += soft[r * c + j];
    }
    if (std::abs(s - 1.0) > 1e-6)
      throw ContractError("kl_divergence_loss: soft label row " + std::to_string(r) + " sums to " + std::to_string(s));
    ++count;
  }
  if (count == 0) throw ContractError("kl_divergence_loss: every row is masked");
  auto logp = log_softmax_rows(logits, n, c);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (!valid[r]) continue;
    for (std::size_t j = 0; j < c; ++j) {
      const double y = soft[r * c + j];
      if (y > 0.0) total += y * (std::log(y) - logp[r * c + j]);
    }
  }
  return finish(tape, logits, total / static_cast<double>(count), std::vector<double>(soft.begin(), soft.end()),
                std::move(logp), std::move(valid), count, c);
}

template Tensor<float> cross_entropy_loss(num::Tape<float>&, const Tensor<float>&, std::span<const int>,
                                          std::span<const std::uint8_t>);
template Tensor<double> cross_entropy_loss(num::Tape<double>&, const Tensor<double>&, std::span<const int>,
                                           std::span<const std::uint8_t>);
template Tensor<float> kl_divergence_loss(num::Tape<float>&, const Tensor<float>&, std::span<const double>,
                                          std::span<const std::uint8_t>);
template Tensor<double> kl_divergence_loss(num::Tape<double>&, const Tensor<double>&, std::span<const double>,
                                           std::span<const std::uint8_t>);

}  // namespace xlb::training
