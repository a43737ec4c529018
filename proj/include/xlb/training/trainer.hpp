// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_TRAINING_TRAINER_HPP
#define XLB_TRAINING_TRAINER_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xlb/batching/planner.hpp"
#include "xlb/corpus/instance.hpp"
#include "xlb/corpus/tokenizer.hpp"
#include "xlb/lexicon/lexicon.hpp"
#include "xlb/lexicon/tet.hpp"
#include "xlb/model/checkpoint.hpp"
#include "xlb/model/encoder.hpp"
#include "xlb/training/metrics.hpp"

namespace xlb::training {

/// A row of the method matrix: which transfer mechanisms are switched on.
struct Method {
  std::string name;
  /// Random initialization, LRL data only.
  bool scratch = false;
  bool hal = false;
  bool tet = false;
  std::optional<model::GnnKind> getr;
};

/// scratch, joint, hal, hal+tet, getr_gcn, getr_gat, getr_gat+hal, getr_gat+tet, getr_gat+hal+tet.
const std::vector<std::string>& method_names();
Method parse_method(std::string_view name);

struct TrainConfig {
  std::size_t epochs = 50;
  batching::BatchingConfig batching;
  /// Unset: 3e-4 for scratch, 1e-3 otherwise.
  std::optional<double> learning_rate;
  double weight_decay = 0.01;
  /// Weight of the KL term on augmented samples.
  double aug_weight = 1.0;
  double edge_retention = 1.0;
  /// HRL-only pretraining that every non-scratch method starts from.
  std::size_t pretrain_epochs = 3;
  double pretrain_learning_rate = 1e-3;
  lexicon::TetMode tet_mode = lexicon::TetMode::Prose;
  std::uint64_t seed = 1;

  void validate() const;
  double learning_rate_for(const Method& m) const;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Both datasets segmented with one shared tokenizer.
struct PreparedData {
  corpus::Task task = corpus::Task::SentenceClassification;
  std::vector<std::string> label_set;
  corpus::Tokenizer tokenizer;
  std::vector<corpus::EncodedInstance> hrl_train, hrl_validation, hrl_test;
  std::vector<corpus::EncodedInstance> lrl_train, lrl_validation, lrl_test;
  /// Pieces that occur in HRL training text (trained during pretraining).
  std::set<corpus::PieceId> hrl_pieces;
  /// Distinct LRL words of the training split and the lexicon, sorted.
  std::vector<std::string> lrl_words;
  std::optional<lexicon::Lexicon> lexicon;
};

/**
 * Builds the shared tokenizer from the training words of both languages plus
 * both sides of the lexicon (unless `tokenizer` is given, e.g. from a
 * checkpoint), then encodes every split. Throws SchemaError when the two
 * datasets disagree on task or label set.
 */
PreparedData prepare_data(const corpus::Dataset& hrl, const corpus::Dataset& lrl, const lexicon::Lexicon* lex,
                          std::size_t vocab_size, std::size_t max_len,
                          std::optional<corpus::Tokenizer> tokenizer = std::nullopt);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_macro_f1 = 0.0;
};

struct MetricsReport {
  std::string method;
  std::vector<std::string> mechanisms;
  std::uint64_t seed = 0;
  std::vector<std::string> label_set;
  std::uint64_t parameter_count = 0;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  /// lrl_validation, lrl_test, hrl_test.
  std::map<std::string, F1Report> splits;
  std::optional<double> tet_coverage;
};

nlohmann::json to_json(const MetricsReport& r);
/// `epoch,train_loss,val_loss,val_macro_f1` with a header line.
std::string epochs_csv(const MetricsReport& r);

/// Wall-clock figures, kept apart from the report so reports stay reproducible.
struct Timing {
  double pretrain_seconds = 0.0;
  std::vector<double> epoch_seconds;
};

struct Pretrained {
  model::EncoderConfig config;
  model::ParamStore<float> params;
};

/// Plain encoder trained on HRL training data only.
Pretrained pretrain(const PreparedData& data, const model::EncoderConfig& base, const TrainConfig& cfg);

/// Encoder configuration a method implies on top of `base` (vocab, labels, GETR/HAL switches).
model::EncoderConfig method_config(const model::EncoderConfig& base, const PreparedData& data, const Method& m,
                                   std::uint64_t seed);

struct RunResult {
  model::Checkpoint best;
  MetricsReport report;
  Timing timing;
};

/**
 * Fine-tunes one method. Non-scratch methods start from `pre` (computed here
 * when null). Each epoch plans balanced batches (strategic ones only for
 * GETR), minimizes CE on real samples plus aug_weight * KL on HAL samples,
 * and scores LRL validation loss; the epoch with the lowest one is returned.
 * Throws NumericError on a non-finite loss and PrerequisiteError when TET is
 * requested without a lexicon.
 */
RunResult train_run(const PreparedData& data, const model::EncoderConfig& base, const TrainConfig& cfg,
                    const Method& method, const Pretrained* pre = nullptr);

/// Inference context: GETR models see each instance inside a training neighborhood.
struct EvalContext {
  const batching::OverlapIndex* overlap = nullptr;
  const PreparedData* data = nullptr;
  std::size_t neighborhood = 10;
  double edge_retention = 1.0;
  std::uint64_t seed = 0;
};

struct Evaluation {
  double loss = 0.0;
  F1Report f1;
  /// Word-level for labeling tasks, one per instance otherwise.
  std::vector<int> predictions;
};

Evaluation evaluate(const model::Encoder<float>& enc, std::span<const corpus::EncodedInstance> split,
                    const EvalContext& ctx);

/// Batching settings a method actually trains with: strategic batches only
/// for GETR, and B clamped to twice the smaller training pool.
batching::BatchingConfig effective_batching(const PreparedData& data, const TrainConfig& cfg, const Method& m);

/// Scores a trained model on lrl_validation, lrl_test and hrl_test (non-empty splits only),
/// using training neighborhoods when GETR is active.
std::map<std::string, F1Report> evaluate_splits(const model::Encoder<float>& enc, const PreparedData& data,
                                                const TrainConfig& cfg, const Method& m);

/// Checkpoint metadata: tokenizer pieces, label set, method.
nlohmann::json checkpoint_extra(const PreparedData& data, const Method& m, const TrainConfig& cfg);

}  // namespace xlb::training

#endif  // XLB_TRAINING_TRAINER_HPP
