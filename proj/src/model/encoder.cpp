// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/model/encoder.hpp"

#include <algorithm>

#include "xlb/common/error.hpp"

namespace xlb::model {

using corpus::Language;
using num::Tensor;

std::vector<HalPair> make_hal_pairs(const corpus::PaddedBatch& batch, Rng& rng) {
  std::vector<std::size_t> hrl;
  for (std::size_t s = 0; s < batch.batch; ++s)
    if (batch.languages[s] == Language::HRL) hrl.push_back(s);
  std::vector<HalPair> pairs;
  if (hrl.empty()) return pairs;
  for (std::size_t s = 0; s < batch.batch; ++s)
    if (batch.languages[s] == Language::LRL) pairs.push_back({s, hrl[uniform_index(rng, hrl.size())]});
  return pairs;
}

double dynamic_alpha(std::size_t step, std::size_t total) {
  if (total == 0) throw ContractError("dynamic alpha needs a positive step total");
  if (step > total) throw ContractError("dynamic alpha step past the schedule end");
  return static_cast<double>(total - step) / static_cast<double>(total);
}

std::vector<double> mix_labels(std::span<const double> y_hrl, std::span<const double> y_lrl, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("mixing coefficient outside [0,1]");
  if (y_hrl.size() != y_lrl.size()) throw DimensionError("label vectors differ in length");
  std::vector<double> out(y_hrl.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (alpha == 0.0) out[i] = y_lrl[i];
    else if (alpha == 1.0) out[i] = y_hrl[i];
    else out[i] = alpha * y_hrl[i] + (1.0 - alpha) * y_lrl[i];
  }
  return out;
}

template <typename T>
Encoder<T>::Encoder(EncoderConfig cfg) : cfg_(std::move(cfg)), params_(init_params<T>(cfg_)) {}

template <typename T>
Encoder<T>::Encoder(EncoderConfig cfg, ParamStore<T> params) : cfg_(std::move(cfg)), params_(std::move(params)) {
  cfg_.validate();
  for (const auto& [name, shape] : parameter_layout(cfg_)) {
    if (!params_.contains(name)) throw ContractError("missing parameter " + name);
    if (params_.at(name).shape() != shape)
      throw DimensionError("parameter " + name + " has shape " + num::shape_str(params_.at(name).shape()) +
                           ", config implies " + num::shape_str(shape));
  }
  if (params_.names().size() != parameter_layout(cfg_).size())
    throw ContractError("parameter set has entries the config does not describe");
}

template <typename T>
Tensor<T> Encoder<T>::embed(num::Tape<T>& tape, const corpus::PaddedBatch& batch) const {
  if (batch.seq_len > cfg_.max_len)
    throw IndexError("sequence length " + std::to_string(batch.seq_len) + " exceeds max_len " +
                     std::to_string(cfg_.max_len));
  std::vector<std::int32_t> pos(batch.nodes());
  for (std::size_t r = 0; r < pos.size(); ++r) pos[r] = static_cast<std::int32_t>(r % batch.seq_len);
  return num::add(tape, num::embedding(tape, params_.at("tok_emb"), std::span<const std::int32_t>(batch.ids)),
                  num::embedding(tape, params_.at("pos_emb"), std::span<const std::int32_t>(pos)));
}

template <typename T>
Tensor<T> Encoder<T>::layer(num::Tape<T>& tape, const std::string& p, const Tensor<T>& x,
                            const num::SeqLayout& layout, Rng* rng, const Tensor<T>* qk_source) const {
  const auto& P = params_;
  const Tensor<T>& src = qk_source ? *qk_source : x;
  const T drop = static_cast<T>(cfg_.dropout);
  auto q = num::affine(tape, src, P.at(p + ".wq"), P.at(p + ".bq"));
  auto k = num::affine(tape, src, P.at(p + ".wk"), P.at(p + ".bk"));
  auto v = num::affine(tape, x, P.at(p + ".wv"), P.at(p + ".bv"));
  auto att = num::attention(tape, q, k, v, layout, cfg_.num_heads);
  auto o = num::affine(tape, att, P.at(p + ".wo"), P.at(p + ".bo"));
  if (rng) o = num::dropout(tape, o, drop, *rng);
  auto x1 = num::layer_norm(tape, num::add(tape, x, o), P.at(p + ".ln1.g"), P.at(p + ".ln1.b"), T(1e-5));
  auto h = num::gelu(tape, num::affine(tape, x1, P.at(p + ".w1"), P.at(p + ".b1")));
  auto f = num::affine(tape, h, P.at(p + ".w2"), P.at(p + ".b2"));
  if (rng) f = num::dropout(tape, f, drop, *rng);
  return num::layer_norm(tape, num::add(tape, x1, f), P.at(p + ".ln2.g"), P.at(p + ".ln2.b"), T(1e-5));
}

template <typename T>
Tensor<T> Encoder<T>::gnn_stack(num::Tape<T>& tape, const Tensor<T>& x, const num::Csr& graph,
                                bool detach_gat_scores) const {
  if (graph.rows != x.dim(0))
    throw ContractError("graph has " + std::to_string(graph.rows) + " nodes for " + std::to_string(x.dim(0)) +
                        " token positions");
  Tensor<T> h = x;
  for (std::size_t j = 0; j < cfg_.getr.depth; ++j) {
    const std::string p = "gnn" + std::to_string(j);
    auto z = num::matmul(tape, h, params_.at(p + ".w"));
    if (cfg_.getr.kind == GnnKind::GCN) {
      auto agg = num::spmm(tape, graph, z);
      if (cfg_.getr.gcn_bias) agg = num::add_bias(tape, agg, params_.at(p + ".b"));
      h = num::relu(tape, agg);
    } else {
      auto center = num::matvec(tape, z, params_.at(p + ".a_center"));
      auto neighbor = num::matvec(tape, z, params_.at(p + ".a_neighbor"));
      if (detach_gat_scores) {
        center = num::detach(center);
        neighbor = num::detach(neighbor);
      }
      h = num::elu(tape, num::gat_aggregate(tape, z, center, neighbor, graph, T(0.2)));
    }
  }
  return h;
}

template <typename T>
ForwardResult<T> Encoder<T>::forward(num::Tape<T>& tape, const ForwardRequest& req) const {
  if (!req.batch) throw ContractError("forward without a batch");
  const auto& batch = *req.batch;
  const std::size_t S = batch.seq_len;
  const bool sentence = cfg_.task == corpus::Task::SentenceClassification;
  const auto layout = batch.layout();
  ForwardResult<T> res;

  Tensor<T> x = embed(tape, batch);
  for (std::size_t i = 0; i < cfg_.num_layers; ++i) {
    const std::string p = "layer" + std::to_string(i);
    if (cfg_.getr.enabled && i == cfg_.getr_layer()) {
      if (!req.graph) throw ContractError("GETR is enabled but no token graph was supplied");
      res.graph_states = gnn_stack(tape, x, *req.graph, req.detach_gat_scores);
      x = layer(tape, p, x, layout, req.dropout_rng, &res.graph_states);
    } else {
      x = layer(tape, p, x, layout, req.dropout_rng);
    }
  }

  std::vector<Tensor<T>> stream{x};
  if (cfg_.hal.enabled) {
    for (std::size_t k = 0; k < cfg_.hal.depth; ++k) {
      x = layer(tape, "hal" + std::to_string(k), x, layout, req.dropout_rng);
      stream.push_back(x);
    }
  }

  const auto& hw = params_.at("head.w");
  const auto& hb = params_.at("head.b");
  std::vector<std::size_t> cls_rows(batch.batch);
  for (std::size_t b = 0; b < batch.batch; ++b) cls_rows[b] = b * S;
  res.cls_states = num::gather_rows(tape, x, std::span<const std::size_t>(cls_rows));
  res.logits = sentence ? num::affine(tape, res.cls_states, hw, hb) : num::affine(tape, x, hw, hb);

  if (req.hal_pairs && !req.hal_pairs->empty()) {
    if (!cfg_.hal.enabled) throw ContractError("HAL pairs supplied but HAL is disabled");
    const auto& pairs = *req.hal_pairs;
    const T alpha = static_cast<T>(req.alpha);
    num::SeqLayout aug_layout{pairs.size(), S, {}};
    std::vector<std::size_t> rows_l, rows_h;
    std::vector<std::uint8_t> mix;
    for (const auto& pr : pairs) {
      if (pr.lrl_row >= batch.batch || pr.hrl_row >= batch.batch) throw IndexError("HAL pair outside the batch");
      const std::size_t len_l = batch.lengths[pr.lrl_row], len_h = batch.lengths[pr.hrl_row];
      aug_layout.lengths.push_back(len_l);
      for (std::size_t s = 0; s < S; ++s) {
        rows_l.push_back(pr.lrl_row * S + s);
        rows_h.push_back(pr.hrl_row * S + s);
        mix.push_back(sentence ? (s == 0) : (s < std::min(len_l, len_h)));
      }
    }
    auto hrl_at = [&](std::size_t level) {
      return num::gather_rows(tape, stream[level], std::span<const std::size_t>(rows_h));
    };
    Tensor<T> a = num::masked_lerp(tape, num::gather_rows(tape, stream[0], std::span<const std::size_t>(rows_l)),
                                   hrl_at(0), alpha, std::span<const std::uint8_t>(mix));
    for (std::size_t k = 0; k < cfg_.hal.depth; ++k) {
      a = layer(tape, "hal" + std::to_string(k), a, aug_layout, req.dropout_rng);
      a = num::masked_lerp(tape, a, hrl_at(k + 1), alpha, std::span<const std::uint8_t>(mix));
    }
    if (sentence) {
      std::vector<std::size_t> aug_cls(pairs.size());
      for (std::size_t i = 0; i < pairs.size(); ++i) aug_cls[i] = i * S;
      res.aug_logits = num::affine(tape, num::gather_rows(tape, a, std::span<const std::size_t>(aug_cls)), hw, hb);
    } else {
      res.aug_logits = num::affine(tape, a, hw, hb);
      res.aug_row_mask.resize(mix.size());
      for (std::size_t r = 0; r < mix.size(); ++r) res.aug_row_mask[r] = mix[r] && (r % S) != 0;
    }
  }
  return res;
}

template class Encoder<float>;
template class Encoder<double>;

}  // namespace xlb::model
