// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_MODEL_CONFIG_HPP
#define XLB_MODEL_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string_view>

#include <json.hpp>

#include "xlb/corpus/instance.hpp"

namespace xlb::model {

enum class GnnKind { GCN, GAT };
enum class AlphaMode { Fixed, Dynamic };
enum class GnnInit { Glorot, Identity };

std::string_view to_string(GnnKind k);
std::string_view to_string(AlphaMode m);
std::string_view to_string(GnnInit i);
GnnKind parse_gnn_kind(std::string_view s);
AlphaMode parse_alpha_mode(std::string_view s);
GnnInit parse_gnn_init(std::string_view s);

struct GetrConfig {
  bool enabled = false;
  GnnKind kind = GnnKind::GAT;
  std::size_t depth = 2;
  /// Transformer layer whose Q/K are graph-enhanced; unset means the last one.
  std::optional<std::size_t> insertion_index;
  bool gcn_bias = false;
  GnnInit init = GnnInit::Glorot;
};

struct HalConfig {
  bool enabled = false;
  std::size_t depth = 2;
  AlphaMode mode = AlphaMode::Fixed;
  double alpha = 0.2;
};

struct EncoderConfig {
  corpus::Task task = corpus::Task::SentenceClassification;
  std::size_t vocab_size = 0;
  std::size_t d_model = 64;
  std::size_t num_heads = 4;
  std::size_t d_ff = 128;
  std::size_t num_layers = 4;
  std::size_t max_len = 32;
  std::size_t num_labels = 2;
  GetrConfig getr;
  HalConfig hal;
  double dropout = 0.1;
  double init_std = 0.02;
  /// Dense projections draw from N(0, 1/fan_in) instead of N(0, init_std).
  bool fan_in_init = true;
  std::uint64_t seed = 1;

  /// Throws ConfigError when the description is inconsistent.
  void validate() const;
  std::size_t getr_layer() const { return getr.insertion_index.value_or(num_layers - 1); }
};

nlohmann::json to_json(const EncoderConfig& cfg);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

}  // namespace xlb::model

#endif  // XLB_MODEL_CONFIG_HPP
