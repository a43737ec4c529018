// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_CLI_EXPERIMENT_HPP
#define XLB_CLI_EXPERIMENT_HPP

#include <filesystem>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlb/corpus/synthetic.hpp"
#include "xlb/model/config.hpp"
#include "xlb/training/trainer.hpp"

namespace xlb::cli {

/// External datasets used instead of the synthetic generator.
struct DataPaths {
  std::string hrl;
  std::string lrl;
  std::string lexicon;  // optional
  corpus::Task task = corpus::Task::SentenceClassification;
};

/**
 * Everything one experiment needs. Defaults describe the desk-scale setting;
 * a JSON file and `dotted.key=value` overrides are layered on top.
 */
struct ExperimentConfig {
  corpus::SyntheticSpec synthetic;
  std::optional<DataPaths> data;
  std::size_t vocab_size = 600;
  model::EncoderConfig encoder;
  training::TrainConfig train;
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "xlbridge-out";

  void validate() const;
};

ExperimentConfig default_experiment_config();
nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
/// Defaults, then the file (if any), then `key.path=value` overrides (values parsed as JSON, else strings).
ExperimentConfig load_experiment_config(const std::optional<std::filesystem::path>& file,
                                        const std::vector<std::string>& overrides);

nlohmann::json to_json(const corpus::SyntheticSpec& spec);
corpus::SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

struct Corpus {
  corpus::Dataset hrl;
  corpus::Dataset lrl;
  std::optional<lexicon::Lexicon> lexicon;
};

/// Synthetic corpus from `synthetic`, or the datasets named in `data`.
Corpus load_corpus(const ExperimentConfig& cfg);

/**
 * Prepared data plus a per-seed cache of HRL pretraining, shared by every
 * method run on the same data. Safe to call run() from several threads.
 */
class Experiment {
 public:
  Experiment(ExperimentConfig cfg, const Corpus& corpus);

  const ExperimentConfig& config() const { return cfg_; }
  const training::PreparedData& data() const { return data_; }

  /// Train one method with `train.seed = seed`; `encoder`/`train` default to the config's.
  training::RunResult run(const std::string& method, std::uint64_t seed,
                          const std::optional<model::EncoderConfig>& encoder = std::nullopt,
                          const std::optional<training::TrainConfig>& train = std::nullopt);

  const training::Pretrained& pretrained(const model::EncoderConfig& encoder, const training::TrainConfig& train);

 private:
  ExperimentConfig cfg_;
  training::PreparedData data_;
  std::mutex mu_;
  std::map<std::string, std::shared_future<training::Pretrained>> pretrain_cache_;
};

}  // namespace xlb::cli

#endif  // XLB_CLI_EXPERIMENT_HPP
