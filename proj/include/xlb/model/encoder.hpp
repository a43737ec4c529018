// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_MODEL_ENCODER_HPP
#define XLB_MODEL_ENCODER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xlb/common/rng.hpp"
#include "xlb/corpus/batch.hpp"
#include "xlb/model/config.hpp"
#include "xlb/model/params.hpp"
#include "xlb/numerics/ops.hpp"

namespace xlb::model {

/// One HAL augmented sample: an LRL sentence mixed with an HRL sentence of the same batch.
struct HalPair {
  std::size_t lrl_row = 0;  // sentence index in the batch
  std::size_t hrl_row = 0;
};

/// Each LRL sentence paired with a uniformly drawn HRL sentence of the batch.
std::vector<HalPair> make_hal_pairs(const corpus::PaddedBatch& batch, Rng& rng);

/// Linear 1 -> 0 schedule: (total - step) / total.
double dynamic_alpha(std::size_t step, std::size_t total);

/// Eq.-2 style label mixing: alpha * y_hrl + (1 - alpha) * y_lrl.
std::vector<double> mix_labels(std::span<const double> y_hrl, std::span<const double> y_lrl, double alpha);

struct ForwardRequest {
  const corpus::PaddedBatch* batch = nullptr;
  /// GCN: normalized adjacency; GAT: neighborhoods with self-loops. Required iff GETR is on.
  const num::Csr* graph = nullptr;
  const std::vector<HalPair>* hal_pairs = nullptr;
  double alpha = 0.0;
  /// Non-null enables dropout (training mode).
  Rng* dropout_rng = nullptr;
  /// Test hook: stop gradients through GAT edge scores (fault injection for gradcheck).
  bool detach_gat_scores = false;
};

template <typename T>
struct ForwardResult {
  /// [B, C] for sentence tasks, [B*S, C] for sequence tasks.
  num::Tensor<T> logits;
  /// Final hidden state at each CLS position, [B, D].
  num::Tensor<T> cls_states;
  /// HAL samples: [P, C] (sentence) or [P*S, C] (sequence); undefined without pairs.
  num::Tensor<T> aug_logits;
  /// Sequence task: aug rows whose position is real in both mixed sentences.
  std::vector<std::uint8_t> aug_row_mask;
  /// Graph-enhanced hidden states fed to Q/K, [B*S, D] (GETR only).
  num::Tensor<T> graph_states;
};

template <typename T>
class Encoder {
 public:
  explicit Encoder(EncoderConfig cfg);
  Encoder(EncoderConfig cfg, ParamStore<T> params);

  const EncoderConfig& config() const { return cfg_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }

  ForwardResult<T> forward(num::Tape<T>& tape, const ForwardRequest& req) const;

  /// Embedding of ids (token + position), [B*S, D].
  num::Tensor<T> embed(num::Tape<T>& tape, const corpus::PaddedBatch& batch) const;
  /// One post-LN transformer layer; `qk_source` defaults to `x`.
  num::Tensor<T> layer(num::Tape<T>& tape, const std::string& prefix, const num::Tensor<T>& x,
                       const num::SeqLayout& layout, Rng* dropout_rng,
                       const num::Tensor<T>* qk_source = nullptr) const;
  num::Tensor<T> gnn_stack(num::Tape<T>& tape, const num::Tensor<T>& x, const num::Csr& graph,
                           bool detach_gat_scores = false) const;

 private:
  EncoderConfig cfg_;
  ParamStore<T> params_;
};

extern template class Encoder<float>;
extern template class Encoder<double>;

}  // namespace xlb::model

#endif  // XLB_MODEL_ENCODER_HPP
