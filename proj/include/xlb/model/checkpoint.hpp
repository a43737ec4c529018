// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_MODEL_CHECKPOINT_HPP
#define XLB_MODEL_CHECKPOINT_HPP

#include <filesystem>

#include <json.hpp>

#include "xlb/model/config.hpp"
#include "xlb/model/params.hpp"

namespace xlb::model {

struct Checkpoint {
  EncoderConfig config;
  ParamStore<float> params;
  /// Caller-defined metadata (tokenizer pieces, method name, ...).
  nlohmann::json extra = nlohmann::json::object();
};

// JSON container {format, version, config, params: [{name, shape, values}], extra}.
// Loading re-derives every shape from the config and rejects mismatches.

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace xlb::model

#endif  // XLB_MODEL_CHECKPOINT_HPP
