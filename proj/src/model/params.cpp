// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/model/params.hpp"

#include <cmath>
#include <random>

#include "xlb/common/error.hpp"
#include "xlb/common/rng.hpp"

namespace xlb::model {

template <typename T>
num::Tensor<T>& ParamStore<T>::add(const std::string& name, num::Shape shape) {
  if (index_.count(name)) throw ContractError("duplicate parameter " + name);
  names_.push_back(name);
  auto [it, _] = index_.emplace(name, num::Tensor<T>(std::move(shape)));
  it->second.set_requires_grad(true);
  return it->second;
}

template <typename T>
num::Tensor<T>& ParamStore<T>::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter " + name);
  return it->second;
}

template <typename T>
const num::Tensor<T>& ParamStore<T>::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter " + name);
  return it->second;
}

template <typename T>
std::size_t ParamStore<T>::total_size() const {
  std::size_t n = 0;
  for (const auto& [_, t] : index_) n += t.size();
  return n;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& [_, t] : index_) t.zero_grad();
}

template class ParamStore<float>;
template class ParamStore<double>;

namespace {

void layer_layout(std::vector<std::pair<std::string, num::Shape>>& out, const std::string& p, std::size_t d,
                  std::size_t f) {
  for (const char* proj : {"q", "k", "v", "o"}) {
    out.push_back({p + ".w" + proj, {d, d}});
    out.push_back({p + ".b" + proj, {d}});
  }
  out.push_back({p + ".ln1.g", {d}});
  out.push_back({p + ".ln1.b", {d}});
  out.push_back({p + ".w1", {d, f}});
  out.push_back({p + ".b1", {f}});
  out.push_back({p + ".w2", {f, d}});
  out.push_back({p + ".b2", {d}});
  out.push_back({p + ".ln2.g", {d}});
  out.push_back({p + ".ln2.b", {d}});
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<std::pair<std::string, num::Shape>> parameter_layout(const EncoderConfig& cfg) {
  const std::size_t d = cfg.d_model, f = cfg.d_ff;
  std::vector<std::pair<std::string, num::Shape>> out;
  out.push_back({"tok_emb", {cfg.vocab_size, d}});
  out.push_back({"pos_emb", {cfg.max_len, d}});
  for (std::size_t i = 0; i < cfg.num_layers; ++i) layer_layout(out, "layer" + std::to_string(i), d, f);
  if (cfg.getr.enabled) {
    for (std::size_t j = 0; j < cfg.getr.depth; ++j) {
      const std::string p = "gnn" + std::to_string(j);
      out.push_back({p + ".w", {d, d}});
      if (cfg.getr.kind == GnnKind::GCN && cfg.getr.gcn_bias) out.push_back({p + ".b", {d}});
      if (cfg.getr.kind == GnnKind::GAT) {
        out.push_back({p + ".a_center", {d}});
        out.push_back({p + ".a_neighbor", {d}});
      }
    }
  }
  if (cfg.hal.enabled)
    for (std::size_t k = 0; k < cfg.hal.depth; ++k) layer_layout(out, "hal" + std::to_string(k), d, f);
  out.push_back({"head.w", {d, cfg.num_labels}});
  out.push_back({"head.b", {cfg.num_labels}});
  return out;
}

template <typename T>
ParamStore<T> init_params(const EncoderConfig& cfg) {
  cfg.validate();
  ParamStore<T> store;
  for (const auto& [name, shape] : parameter_layout(cfg)) {
    auto& t = store.add(name, shape);
    // Each tensor draws from its own stream so adding a module does not
    // reshuffle the initialization of the others.
    Rng rng(derive_seed(cfg.seed, name));
    const bool is_gnn_weight = name.rfind("gnn", 0) == 0 && ends_with(name, ".w");
    if (ends_with(name, ".g")) {
      for (auto& v : t.values()) v = T{1};
    } else if (is_gnn_weight && cfg.getr.init == GnnInit::Identity) {
      for (std::size_t i = 0; i < cfg.d_model; ++i) t[i * cfg.d_model + i] = T{1};
    } else if (shape.size() == 2 || ends_with(name, ".a_center") || ends_with(name, ".a_neighbor")) {
      const bool embedding = name == "tok_emb" || name == "pos_emb";
      double std = cfg.init_std;
      if (is_gnn_weight || (cfg.fan_in_init && shape.size() == 2 && !embedding))
        std = 1.0 / std::sqrt(static_cast<double>(shape[0]));
      std::normal_distribution<double> dist(0.0, std);
      for (auto& v : t.values()) v = static_cast<T>(dist(rng));
    }
  }
  return store;
}

template ParamStore<float> init_params<float>(const EncoderConfig&);
template ParamStore<double> init_params<double>(const EncoderConfig&);

std::uint64_t count_parameters(const StackShape& s) {
  const std::uint64_t d = s.d_model, f = s.d_ff;
  const std::uint64_t embeddings = s.vocab_size * d + s.max_len * d;
  // 4 projections with bias, 2 layer norms, 2-layer FFN with biases.
  const std::uint64_t per_layer = 4 * (d * d + d) + 2 * (2 * d) + (d * f + f) + (f * d + d);
  const std::uint64_t per_gcn = d * d + (s.gcn_bias ? d : 0);
  const std::uint64_t per_gat = d * d + 2 * d;
  const std::uint64_t head = d * s.num_labels + s.num_labels;
  return embeddings + (s.transformer_layers + s.hal_layers) * per_layer + s.gcn_layers * per_gcn +
         s.gat_layers * per_gat + head;
}

std::uint64_t count_parameters(const EncoderConfig& cfg) {
  StackShape s;
  s.vocab_size = cfg.vocab_size;
  s.max_len = cfg.max_len;
  s.d_model = cfg.d_model;
  s.d_ff = cfg.d_ff;
  s.transformer_layers = cfg.num_layers;
  if (cfg.getr.enabled) {
    (cfg.getr.kind == GnnKind::GCN ? s.gcn_layers : s.gat_layers) = cfg.getr.depth;
    s.gcn_bias = cfg.getr.gcn_bias;
  }
  s.hal_layers = cfg.hal.enabled ? cfg.hal.depth : 0;
  s.num_labels = cfg.num_labels;
  return count_parameters(s);
}

}  // namespace xlb::model
