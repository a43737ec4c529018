// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/model/config.hpp"

#include <string>

#include "xlb/common/error.hpp"

namespace xlb::model {

using json = nlohmann::json;

std::string_view to_string(GnnKind k) { return k == GnnKind::GCN ? "gcn" : "gat"; }
std::string_view to_string(AlphaMode m) { return m == AlphaMode::Fixed ? "fixed" : "dynamic"; }
std::string_view to_string(GnnInit i) { return i == GnnInit::Glorot ? "glorot" : "identity"; }

GnnKind parse_gnn_kind(std::string_view s) {
  if (s == "gcn" || s == "GCN") return GnnKind::GCN;
  if (s == "gat" || s == "GAT") return GnnKind::GAT;
  throw ConfigError("unknown GNN kind '" + std::string(s) + "'");
}

AlphaMode parse_alpha_mode(std::string_view s) {
  if (s == "fixed") return AlphaMode::Fixed;
  if (s == "dynamic") return AlphaMode::Dynamic;
  throw ConfigError("unknown alpha mode '" + std::string(s) + "'");
}

GnnInit parse_gnn_init(std::string_view s) {
  if (s == "glorot") return GnnInit::Glorot;
  if (s == "identity") return GnnInit::Identity;
  throw ConfigError("unknown GNN init '" + std::string(s) + "'");
}

void EncoderConfig::validate() const {
  if (vocab_size < 4) throw ConfigError("vocab_size must cover the 3 special pieces plus one");
  if (d_model == 0 || num_heads == 0 || d_model % num_heads != 0)
    throw ConfigError("d_model (" + std::to_string(d_model) + ") must be divisible by num_heads (" +
                      std::to_string(num_heads) + ")");
  if (d_ff == 0) throw ConfigError("d_ff must be positive");
  if (max_len < 2) throw ConfigError("max_len must be >= 2");
  if (num_labels < 2) throw ConfigError("num_labels must be >= 2");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (!(init_std > 0.0)) throw ConfigError("init_std must be positive");
  if (getr.enabled) {
    if (num_layers == 0) throw ConfigError("GETR needs at least one transformer layer");
    if (getr_layer() >= num_layers)
      throw ConfigError("getr.insertion_index " + std::to_string(getr_layer()) + " >= num_layers " +
                        std::to_string(num_layers));
    if (getr.depth == 0) throw ConfigError("getr.depth must be >= 1");
  }
  if (hal.enabled && !(hal.alpha >= 0.0 && hal.alpha <= 1.0))
    throw ConfigError("hal.alpha must be in [0, 1]");
}

json to_json(const EncoderConfig& c) {
  json getr = {{"enabled", c.getr.enabled},
               {"gnn_kind", std::string(to_string(c.getr.kind))},
               {"gnn_depth", c.getr.depth},
               {"gcn_bias", c.getr.gcn_bias},
               {"gnn_init", std::string(to_string(c.getr.init))}};
  getr["insertion_index"] = c.getr.insertion_index ? json(*c.getr.insertion_index) : json(nullptr);
  return {{"task", std::string(corpus::to_string(c.task))},
          {"vocab_size", c.vocab_size},
          {"d_model", c.d_model},
          {"num_heads", c.num_heads},
          {"d_ff", c.d_ff},
          {"num_layers", c.num_layers},
          {"max_len", c.max_len},
          {"num_labels", c.num_labels},
          {"getr", getr},
          {"hal",
           {{"enabled", c.hal.enabled},
            {"depth", c.hal.depth},
            {"alpha_mode", std::string(to_string(c.hal.mode))},
            {"alpha", c.hal.alpha}}},
          {"dropout", c.dropout},
          {"init_std", c.init_std},
          {"fan_in_init", c.fan_in_init},
          {"seed", c.seed}};
}

EncoderConfig encoder_config_from_json(const json& j) {
  EncoderConfig c;
  try {
    c.task = corpus::parse_task(j.at("task").get<std::string>());
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.d_model = j.at("d_model").get<std::size_t>();
    c.num_heads = j.at("num_heads").get<std::size_t>();
    c.d_ff = j.at("d_ff").get<std::size_t>();
    c.num_layers = j.at("num_layers").get<std::size_t>();
    c.max_len = j.at("max_len").get<std::size_t>();
    c.num_labels = j.at("num_labels").get<std::size_t>();
    const auto& g = j.at("getr");
    c.getr.enabled = g.at("enabled").get<bool>();
    c.getr.kind = parse_gnn_kind(g.at("gnn_kind").get<std::string>());
    c.getr.depth = g.at("gnn_depth").get<std::size_t>();
    c.getr.gcn_bias = g.value("gcn_bias", false);
    c.getr.init = parse_gnn_init(g.value("gnn_init", std::string("glorot")));
    if (g.contains("insertion_index") && !g.at("insertion_index").is_null())
      c.getr.insertion_index = g.at("insertion_index").get<std::size_t>();
    const auto& h = j.at("hal");
    c.hal.enabled = h.at("enabled").get<bool>();
    c.hal.depth = h.at("depth").get<std::size_t>();
    c.hal.mode = parse_alpha_mode(h.at("alpha_mode").get<std::string>());
    c.hal.alpha = h.at("alpha").get<double>();
    c.dropout = j.at("dropout").get<double>();
    c.init_std = j.value("init_std", 0.02);
    c.fan_in_init = j.value("fan_in_init", true);
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad encoder config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace xlb::model
