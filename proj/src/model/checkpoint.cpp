// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/model/checkpoint.hpp"

#include <fstream>

#include "xlb/common/error.hpp"

namespace xlb::model {

using json = nlohmann::json;

namespace {
constexpr const char* kFormat = "xlbridge-checkpoint";
constexpr int kVersion = 1;
}  // namespace

json checkpoint_to_json(const Checkpoint& ckpt) {
  json params = json::array();
  for (const auto& name : ckpt.params.names()) {
    const auto& t = ckpt.params.at(name);
    params.push_back({{"name", name},
                      {"shape", t.shape()},
                      {"values", std::vector<float>(t.values().begin(), t.values().end())}});
  }
  return {{"format", kFormat},
          {"version", kVersion},
          {"config", to_json(ckpt.config)},
          {"params", std::move(params)},
          {"extra", ckpt.extra}};
}

Checkpoint checkpoint_from_json(const json& j) {
  if (j.value("format", std::string()) != kFormat) throw ParseError("not an xlbridge checkpoint");
  if (j.value("version", 0) != kVersion)
    throw ParseError("unsupported checkpoint version " + std::to_string(j.value("version", 0)));
  Checkpoint ckpt;
  ckpt.config = encoder_config_from_json(j.at("config"));
  const auto layout = parameter_layout(ckpt.config);
  const auto& params = j.at("params");
  if (params.size() != layout.size())
    throw SchemaError("checkpoint holds " + std::to_string(params.size()) + " tensors, config implies " +
                      std::to_string(layout.size()));
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& rec = params[i];
    const auto name = rec.at("name").get<std::string>();
    if (name != layout[i].first) throw SchemaError("checkpoint tensor '" + name + "', expected '" + layout[i].first + "'");
    if (rec.at("shape").get<num::Shape>() != layout[i].second)
      throw SchemaError("checkpoint tensor '" + name + "' has the wrong shape");
    const auto values = rec.at("values").get<std::vector<float>>();
    auto& t = ckpt.params.add(name, layout[i].second);
    t.assign(values);
  }
  ckpt.extra = j.value("extra", json::object());
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(ckpt).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace xlb::model
