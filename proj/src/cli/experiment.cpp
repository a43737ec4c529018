// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/cli/experiment.hpp"

#include <fstream>
#include <sstream>

#include "xlb/common/error.hpp"
#include "xlb/corpus/dataset_io.hpp"

namespace xlb::cli {

using nlohmann::json;

namespace {

// Filled in from the data at run time; never stored in experiment files.
const char* const kDerivedEncoderKeys[] = {"task", "vocab_size", "num_labels", "seed"};

json split_sizes_json(const corpus::SplitSizes& s) {
  return {{"train", s.train}, {"validation", s.validation}, {"test", s.test}};
}

corpus::SplitSizes split_sizes_from(const json& j) {
  return {j.at("train").get<std::size_t>(), j.at("validation").get<std::size_t>(), j.at("test").get<std::size_t>()};
}

/// Copies `patch` onto `base`. Keys absent from `base` are rejected; a null
/// default accepts any value.
void overlay(json& base, const json& patch, const std::string& path) {
  if (!patch.is_object()) throw ConfigError("expected an object at '" + (path.empty() ? "<root>" : path) + "'");
  for (const auto& [key, value] : patch.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key '" + where + "'");
    json& slot = base[key];
    if (slot.is_object() && value.is_object()) overlay(slot, value, where);
    else slot = value;
  }
}

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  synthetic.validate();
  if (data && (data->hrl.empty() || data->lrl.empty())) throw ConfigError("data.hrl and data.lrl are both required");
  if (vocab_size < 4) throw ConfigError("vocab_size must be >= 4");
  train.validate();
  if (methods.empty()) throw ConfigError("no methods selected");
  for (const auto& m : methods) training::parse_method(m);
  if (seeds.empty()) throw ConfigError("no seeds selected");
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig c;
  c.vocab_size = 700;
  c.encoder.d_model = 32;
  c.encoder.num_heads = 4;
  c.encoder.d_ff = 64;
  c.encoder.num_layers = 2;
  c.encoder.max_len = 32;
  c.encoder.dropout = 0.1;
  c.train.epochs = 6;
  c.train.batching.batch_size = 32;
  c.train.batching.group_size = 10;
  c.train.batching.batches_per_epoch = 40;
  c.train.batching.eval_neighborhood = 10;
  c.methods = training::method_names();
  c.seeds = {1, 2, 3};
  return c;
}

json to_json(const corpus::SyntheticSpec& s) {
  return {{"task", std::string(corpus::to_string(s.task))},
          {"num_classes", s.num_classes},
          {"hrl_vocab_size", s.hrl_vocab_size},
          {"lrl_vocab_size", s.lrl_vocab_size},
          {"function_word_fraction", s.function_word_fraction},
          {"shared_surface_fraction", s.shared_surface_fraction},
          {"min_len", s.min_len},
          {"max_len", s.max_len},
          {"signal_strength", s.signal_strength},
          {"function_word_rate", s.function_word_rate},
          {"zipf_exponent", s.zipf_exponent},
          {"hrl_sizes", split_sizes_json(s.hrl_sizes)},
          {"lrl_sizes", split_sizes_json(s.lrl_sizes)},
          {"seed", s.seed}};
}

corpus::SyntheticSpec synthetic_spec_from_json(const json& j) {
  json full = to_json(corpus::SyntheticSpec{});
  overlay(full, j, "synthetic");
  corpus::SyntheticSpec s;
  try {
    s.task = corpus::parse_task(full.at("task").get<std::string>());
    s.num_classes = full.at("num_classes").get<std::size_t>();
    s.hrl_vocab_size = full.at("hrl_vocab_size").get<std::size_t>();
    s.lrl_vocab_size = full.at("lrl_vocab_size").get<std::size_t>();
    s.function_word_fraction = full.at("function_word_fraction").get<double>();
    s.shared_surface_fraction = full.at("shared_surface_fraction").get<double>();
    s.min_len = full.at("min_len").get<std::size_t>();
    s.max_len = full.at("max_len").get<std::size_t>();
    s.signal_strength = full.at("signal_strength").get<double>();
    s.function_word_rate = full.at("function_word_rate").get<double>();
    s.zipf_exponent = full.at("zipf_exponent").get<double>();
    s.hrl_sizes = split_sizes_from(full.at("hrl_sizes"));
    s.lrl_sizes = split_sizes_from(full.at("lrl_sizes"));
    s.seed = full.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad synthetic corpus config: ") + e.what());
  }
  s.validate();
  return s;
}

json to_json(const ExperimentConfig& c) {
  json encoder = model::to_json(c.encoder);
  for (const char* key : kDerivedEncoderKeys) encoder.erase(key);
  json data = nullptr;
  if (c.data)
    data = {{"hrl", c.data->hrl}, {"lrl", c.data->lrl}, {"lexicon", c.data->lexicon},
            {"task", std::string(corpus::to_string(c.data->task))}};
  return {{"synthetic", to_json(c.synthetic)},
          {"data", data},
          {"vocab_size", c.vocab_size},
          {"encoder", encoder},
          {"train", training::to_json(c.train)},
          {"methods", c.methods},
          {"seeds", c.seeds},
          {"out_dir", c.out_dir}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  json full = to_json(default_experiment_config());
  overlay(full, j, "");
  ExperimentConfig c;
  try {
    c.synthetic = synthetic_spec_from_json(full.at("synthetic"));
    if (!full.at("data").is_null()) {
      const json& d = full.at("data");
      for (const auto& [key, value] : d.items())
        if (key != "hrl" && key != "lrl" && key != "lexicon" && key != "task")
          throw ConfigError("unknown config key 'data." + key + "'");
      DataPaths p;
      p.hrl = d.value("hrl", std::string());
      p.lrl = d.value("lrl", std::string());
      p.lexicon = d.value("lexicon", std::string());
      p.task = corpus::parse_task(d.value("task", std::string("sentence_classification")));
      c.data = p;
    }
    c.vocab_size = full.at("vocab_size").get<std::size_t>();
    json encoder = full.at("encoder");
    encoder["task"] = corpus::to_string(corpus::Task::SentenceClassification);
    encoder["vocab_size"] = 4;
    encoder["num_labels"] = 2;
    encoder["seed"] = 1;
    c.encoder = model::encoder_config_from_json(encoder);
    c.train = training::train_config_from_json(full.at("train"));
    c.methods = full.at("methods").get<std::vector<std::string>>();
    c.seeds = full.at("seeds").get<std::vector<std::uint64_t>>();
    c.out_dir = full.at("out_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::optional<std::filesystem::path>& file,
                                        const std::vector<std::string>& overrides) {
  json patch = json::object();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot open config file " + file->string());
    try {
      patch = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + file->string() + " is not valid JSON: " + e.what());
    }
  }
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + item + "' is not key=value");
    std::vector<std::string> path;
    std::stringstream keys(item.substr(0, eq));
    for (std::string part; std::getline(keys, part, '.');) {
      if (part.empty()) throw ConfigError("override '" + item + "' has an empty key segment");
      path.push_back(part);
    }
    json* node = &patch;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      json& next = (*node)[path[i]];
      if (!next.is_object()) next = json::object();
      node = &next;
    }
    (*node)[path.back()] = parse_override_value(item.substr(eq + 1));
  }
  return experiment_config_from_json(patch);
}

Corpus load_corpus(const ExperimentConfig& cfg) {
  Corpus c;
  if (cfg.data) {
    c.hrl = corpus::load_dataset(cfg.data->hrl, cfg.data->task);
    c.lrl = corpus::load_dataset(cfg.data->lrl, cfg.data->task);
    if (!cfg.data->lexicon.empty()) c.lexicon = lexicon::Lexicon::load(cfg.data->lexicon);
    return c;
  }
  auto generated = corpus::generate_synthetic(cfg.synthetic);
  c.hrl = std::move(generated.hrl);
  c.lrl = std::move(generated.lrl);
  c.lexicon = std::move(generated.lexicon);
  return c;
}

Experiment::Experiment(ExperimentConfig cfg, const Corpus& corpus) : cfg_(std::move(cfg)) {
  cfg_.validate();
  data_ = training::prepare_data(corpus.hrl, corpus.lrl, corpus.lexicon ? &*corpus.lexicon : nullptr,
                                 cfg_.vocab_size, cfg_.encoder.max_len);
}

const training::Pretrained& Experiment::pretrained(const model::EncoderConfig& encoder,
                                                   const training::TrainConfig& train) {
  json key = model::to_json(encoder);
  key.erase("getr");
  key.erase("hal");
  key["pretrain"] = {{"seed", train.seed},
                     {"epochs", train.pretrain_epochs},
                     {"learning_rate", train.pretrain_learning_rate},
                     {"weight_decay", train.weight_decay},
                     {"batch_size", train.batching.batch_size}};
  const std::string id = key.dump();

  std::promise<training::Pretrained> promise;
  std::shared_future<training::Pretrained> future;
  bool owner = false;
  {
    std::lock_guard lock(mu_);
    auto it = pretrain_cache_.find(id);
    if (it == pretrain_cache_.end()) {
      future = promise.get_future().share();
      pretrain_cache_.emplace(id, future);
      owner = true;
    } else {
      future = it->second;
    }
  }
  if (owner) {
    try {
      promise.set_value(training::pretrain(data_, encoder, train));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  // The map keeps a copy of the future, so the shared state outlives this call.
  return future.get();
}

training::RunResult Experiment::run(const std::string& method, std::uint64_t seed,
                                    const std::optional<model::EncoderConfig>& encoder,
                                    const std::optional<training::TrainConfig>& train) {
  const training::Method m = training::parse_method(method);
  const model::EncoderConfig enc = encoder.value_or(cfg_.encoder);
  training::TrainConfig tc = train.value_or(cfg_.train);
  tc.seed = seed;
  if (m.scratch) return training::train_run(data_, enc, tc, m);
  const training::Pretrained& pre = pretrained(enc, tc);
  return training::train_run(data_, enc, tc, m, &pre);
}

}  // namespace xlb::cli
