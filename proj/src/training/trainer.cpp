// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "xlb/common/error.hpp"
#include "xlb/corpus/batch.hpp"
#include "xlb/graph/token_graph.hpp"
#include "xlb/training/losses.hpp"
#include "xlb/training/optimizer.hpp"

namespace xlb::training {

using corpus::EncodedInstance;
using corpus::Language;
using corpus::PaddedBatch;
using json = nlohmann::json;
using model::Encoder;
using model::EncoderConfig;

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"scratch",  "joint",        "hal",          "hal+tet",         "getr_gcn",
                                              "getr_gat", "getr_gat+hal", "getr_gat+tet", "getr_gat+hal+tet"};
  return names;
}

Method parse_method(std::string_view name) {
  const auto& names = method_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string known;
    for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown method '" + std::string(name) + "' (known: " + known + ")");
  }
  Method m;
  m.name = std::string(name);
  m.scratch = name == "scratch";
  m.hal = name.find("hal") != std::string_view::npos;
  m.tet = name.find("tet") != std::string_view::npos;
  if (name.starts_with("getr_gcn")) m.getr = model::GnnKind::GCN;
  if (name.starts_with("getr_gat")) m.getr = model::GnnKind::GAT;
  return m;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (!(aug_weight >= 0.0)) throw ConfigError("aug_weight must be >= 0");
  if (!(edge_retention >= 0.0 && edge_retention <= 1.0)) throw ConfigError("edge_retention must be in [0, 1]");
  if (learning_rate && !(*learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(pretrain_learning_rate > 0.0)) throw ConfigError("pretrain_learning_rate must be positive");
  batching.validate();
}

double TrainConfig::learning_rate_for(const Method& m) const {
  if (learning_rate) return *learning_rate;
  return m.scratch ? 3e-4 : 1e-3;
}

namespace {

template <typename V>
json optional_json(const std::optional<V>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename V>
std::optional<V> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<V>();
}

}  // namespace

json to_json(const TrainConfig& c) {
  const auto& b = c.batching;
  return {{"epochs", c.epochs},
          {"batching",
           {{"batch_size", b.batch_size},
            {"group_size", b.group_size},
            {"strategic_fraction", b.strategic_fraction},
            {"batches_per_epoch", optional_json(b.batches_per_epoch)},
            {"overlap", b.overlap == batching::OverlapMode::Set ? "set" : "multiset"},
            {"translation_overlap", b.translation_overlap},
            {"eval_neighborhood", optional_json(b.eval_neighborhood)}}},
          {"learning_rate", optional_json(c.learning_rate)},
          {"weight_decay", c.weight_decay},
          {"aug_weight", c.aug_weight},
          {"edge_retention", c.edge_retention},
          {"pretrain_epochs", c.pretrain_epochs},
          {"pretrain_learning_rate", c.pretrain_learning_rate},
          {"tet_mode", c.tet_mode == lexicon::TetMode::Prose ? "prose" : "literal"},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  try {
    c.epochs = j.at("epochs").get<std::size_t>();
    const auto& b = j.at("batching");
    c.batching.batch_size = b.at("batch_size").get<std::size_t>();
    c.batching.group_size = b.at("group_size").get<std::size_t>();
    c.batching.strategic_fraction = b.at("strategic_fraction").get<double>();
    c.batching.batches_per_epoch = optional_from<std::size_t>(b, "batches_per_epoch");
    const auto overlap = b.at("overlap").get<std::string>();
    if (overlap == "set") c.batching.overlap = batching::OverlapMode::Set;
    else if (overlap == "multiset") c.batching.overlap = batching::OverlapMode::Multiset;
    else throw ConfigError("batching.overlap must be 'set' or 'multiset'");
    c.batching.translation_overlap = b.at("translation_overlap").get<bool>();
    c.batching.eval_neighborhood = optional_from<std::size_t>(b, "eval_neighborhood");
    c.learning_rate = optional_from<double>(j, "learning_rate");
    c.weight_decay = j.at("weight_decay").get<double>();
    c.aug_weight = j.at("aug_weight").get<double>();
    c.edge_retention = j.at("edge_retention").get<double>();
    c.pretrain_epochs = j.at("pretrain_epochs").get<std::size_t>();
    c.pretrain_learning_rate = j.at("pretrain_learning_rate").get<double>();
    const auto mode = j.at("tet_mode").get<std::string>();
    if (mode == "prose") c.tet_mode = lexicon::TetMode::Prose;
    else if (mode == "literal") c.tet_mode = lexicon::TetMode::Literal;
    else throw ConfigError("tet_mode must be 'prose' or 'literal'");
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad training config: ") + e.what());
  }
  c.validate();
  return c;
}

PreparedData prepare_data(const corpus::Dataset& hrl, const corpus::Dataset& lrl, const lexicon::Lexicon* lex,
                          std::size_t vocab_size, std::size_t max_len, std::optional<corpus::Tokenizer> tokenizer) {
  if (hrl.task != lrl.task) throw SchemaError("HRL and LRL datasets are for different tasks");
  if (hrl.label_set != lrl.label_set) throw SchemaError("HRL and LRL datasets use different label sets");
  PreparedData d;
  d.task = hrl.task;
  d.label_set = hrl.label_set;
  if (lex) d.lexicon = *lex;

  if (tokenizer) {
    d.tokenizer = std::move(*tokenizer);
  } else {
    std::vector<std::string> words;
    for (const auto* split : {&hrl.train, &lrl.train})
      for (const auto& inst : *split) words.insert(words.end(), inst.words.begin(), inst.words.end());
    if (lex) {
      for (const auto& [src, entry] : lex->entries()) {
        words.push_back(src);
        words.push_back(entry.translation);
      }
    }
    d.tokenizer = corpus::Tokenizer::build(words, vocab_size);
  }

  const auto& tok = d.tokenizer;
  d.hrl_train = corpus::encode_all(tok, hrl.train, max_len);
  d.hrl_validation = corpus::encode_all(tok, hrl.validation, max_len);
  d.hrl_test = corpus::encode_all(tok, hrl.test, max_len);
  d.lrl_train = corpus::encode_all(tok, lrl.train, max_len);
  d.lrl_validation = corpus::encode_all(tok, lrl.validation, max_len);
  d.lrl_test = corpus::encode_all(tok, lrl.test, max_len);

  for (const auto& e : d.hrl_train)
    for (auto id : e.ids)
      if (!corpus::Tokenizer::is_special(id)) d.hrl_pieces.insert(id);

  std::set<std::string> lrl_words;
  for (const auto& inst : lrl.train) lrl_words.insert(inst.words.begin(), inst.words.end());
  if (lex)
    for (const auto& [src, entry] : lex->entries()) lrl_words.insert(src);
  d.lrl_words.assign(lrl_words.begin(), lrl_words.end());
  return d;
}

json to_json(const MetricsReport& r) {
  json epochs = json::array();
  for (const auto& e : r.epochs)
    epochs.push_back(
        {{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}, {"val_macro_f1", e.val_macro_f1}});
  json splits = json::object();
  for (const auto& [name, f1] : r.splits) {
    json per_class = json::object();
    for (std::size_t c = 0; c < f1.per_class.size(); ++c)
      per_class[r.label_set.at(c)] = {{"f1", f1.per_class[c]}, {"support", f1.support[c]}};
    splits[name] = {{"macro_f1", f1.macro}, {"per_class", per_class}};
  }
  return {{"method", r.method},
          {"mechanisms", r.mechanisms},
          {"seed", r.seed},
          {"label_set", r.label_set},
          {"parameter_count", r.parameter_count},
          {"epochs", epochs},
          {"best_epoch", r.best_epoch},
          {"best_val_loss", r.best_val_loss},
          {"splits", splits},
          {"tet_coverage", optional_json(r.tet_coverage)}};
}

std::string epochs_csv(const MetricsReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,val_loss,val_macro_f1\n";
  for (const auto& e : r.epochs) out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.val_macro_f1 << '\n';
  return out.str();
}

EncoderConfig method_config(const EncoderConfig& base, const PreparedData& data, const Method& m,
                            std::uint64_t seed) {
  EncoderConfig cfg = base;
  cfg.task = data.task;
  cfg.vocab_size = data.tokenizer.size();
  cfg.num_labels = data.label_set.size();
  cfg.getr.enabled = m.getr.has_value();
  if (m.getr) cfg.getr.kind = *m.getr;
  cfg.hal.enabled = m.hal;
  cfg.seed = derive_seed(seed, "init");
  cfg.validate();
  return cfg;
}

namespace {

bool sentence_task(const PreparedData& d) { return d.task == corpus::Task::SentenceClassification; }

/// Hard-label CE over the real samples of a batch.
num::Tensor<float> real_loss(num::Tape<float>& tape, const model::ForwardResult<float>& res, const PaddedBatch& batch,
                             bool sentence) {
  if (sentence) return cross_entropy_loss(tape, res.logits, std::span<const int>(batch.labels));
  std::vector<int> labels(batch.tags.size());
  std::vector<std::uint8_t> mask(batch.tags.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    mask[i] = batch.tags[i] >= 0;
    labels[i] = std::max(batch.tags[i], 0);
  }
  return cross_entropy_loss(tape, res.logits, std::span<const int>(labels), std::span<const std::uint8_t>(mask));
}

std::vector<double> one_hot(int label, std::size_t classes) {
  std::vector<double> v(classes, 0.0);
  v.at(static_cast<std::size_t>(label)) = 1.0;
  return v;
}

/// KL against mixed labels for the augmented samples; undefined tensor when no row qualifies.
num::Tensor<float> augmented_loss(num::Tape<float>& tape, const model::ForwardResult<float>& res,
                                  const PaddedBatch& batch, const std::vector<model::HalPair>& pairs, double alpha,
                                  std::size_t classes, bool sentence) {
  std::vector<double> soft;
  std::vector<std::uint8_t> mask;
  auto push_mix = [&](int hrl_label, int lrl_label) {
    const auto mixed = model::mix_labels(one_hot(hrl_label, classes), one_hot(lrl_label, classes), alpha);
    soft.insert(soft.end(), mixed.begin(), mixed.end());
  };
  if (sentence) {
    for (const auto& p : pairs) push_mix(batch.labels[p.hrl_row], batch.labels[p.lrl_row]);
  } else {
    const std::size_t S = batch.seq_len;
    for (std::size_t r = 0; r < res.aug_row_mask.size(); ++r) {
      const auto& p = pairs[r / S];
      const int th = batch.tags[p.hrl_row * S + r % S], tl = batch.tags[p.lrl_row * S + r % S];
      const bool ok = res.aug_row_mask[r] && th >= 0 && tl >= 0;
      mask.push_back(ok);
      if (ok) push_mix(th, tl);
      else soft.insert(soft.end(), classes, 0.0);
    }
    if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) return {};
  }
  return kl_divergence_loss(tape, res.aug_logits, std::span<const double>(soft), std::span<const std::uint8_t>(mask));
}

num::Csr batch_graph(const model::EncoderConfig& cfg, const PaddedBatch& batch, const lexicon::Lexicon* lex,
                     double rho, Rng& rng) {
  auto g = graph::build_token_graph(batch, lex);
  if (rho < 1.0) g = graph::apply_edge_retention(g, rho, rng);
  return cfg.getr.kind == model::GnnKind::GCN ? graph::normalize_adjacency(g) : graph::neighborhoods(g);
}

const EncodedInstance& member_instance(const PreparedData& d, const batching::Member& m) {
  return m.language == Language::HRL ? d.hrl_train.at(m.index) : d.lrl_train.at(m.index);
}

/// One optimizer step; returns the loss value.
double train_step(Encoder<float>& enc, AdamWState& opt, const PaddedBatch& batch, const num::Csr* graph,
                  const PreparedData& data, const TrainConfig& cfg, double lr, Rng& dropout_rng, Rng& pair_rng,
                  double alpha, const std::string& where) {
  const bool sentence = sentence_task(data);
  num::Tape<float> tape;
  std::vector<model::HalPair> pairs;
  model::ForwardRequest req;
  req.batch = &batch;
  req.graph = graph;
  req.dropout_rng = &dropout_rng;
  if (enc.config().hal.enabled) {
    pairs = model::make_hal_pairs(batch, pair_rng);
    req.hal_pairs = &pairs;
    req.alpha = alpha;
  }
  const auto res = enc.forward(tape, req);
  auto loss = real_loss(tape, res, batch, sentence);
  if (!pairs.empty() && cfg.aug_weight > 0.0) {
    auto aug = augmented_loss(tape, res, batch, pairs, alpha, data.label_set.size(), sentence);
    if (aug.defined()) loss = num::add(tape, loss, num::scale(tape, aug, static_cast<float>(cfg.aug_weight)));
  }
  const double value = loss.item();
  if (!std::isfinite(value)) throw NumericError("non-finite training loss at " + where);
  enc.params().zero_grad();
  tape.backward(loss);
  adamw_step(enc.params(), opt, lr, cfg.weight_decay);
  return value;
}

std::vector<std::string> mechanisms_of(const Method& m) {
  std::vector<std::string> out;
  if (m.scratch) out.emplace_back("scratch");
  if (m.getr) out.push_back("getr_" + std::string(model::to_string(*m.getr)));
  if (m.hal) out.emplace_back("hal");
  if (m.tet) out.emplace_back("tet");
  if (out.empty()) out.emplace_back("joint");
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Pretrained pretrain(const PreparedData& data, const EncoderConfig& base, const TrainConfig& cfg) {
  cfg.validate();
  Method plain;
  plain.name = "joint";
  EncoderConfig pcfg = method_config(base, data, plain, derive_seed(cfg.seed, "pretrain"));
  Encoder<float> enc(pcfg);
  AdamWState opt;
  Rng dropout_rng(derive_seed(cfg.seed, "pretrain-dropout"));
  Rng unused(0);
  const std::size_t B = std::min(cfg.batching.batch_size, data.hrl_train.size());
  for (std::size_t e = 0; e < cfg.pretrain_epochs; ++e) {
    Rng order_rng(derive_seed(cfg.seed, "pretrain-order", e));
    std::vector<std::size_t> order(data.hrl_train.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle_in_place(order, order_rng);
    for (std::size_t start = 0; start < order.size(); start += B) {
      std::vector<const EncodedInstance*> members;
      for (std::size_t i = start; i < std::min(start + B, order.size()); ++i) members.push_back(&data.hrl_train[order[i]]);
      const auto batch = corpus::make_batch(members);
      train_step(enc, opt, batch, nullptr, data, cfg, cfg.pretrain_learning_rate, dropout_rng, unused, 0.0,
                 "pretraining epoch " + std::to_string(e + 1) + " batch " + std::to_string(start / B + 1));
    }
  }
  return {pcfg, enc.params().cast<float>()};
}

Evaluation evaluate(const Encoder<float>& enc, std::span<const EncodedInstance> split, const EvalContext& ctx) {
  if (split.empty()) throw ContractError("evaluation on an empty split");
  if (!ctx.data) throw ContractError("evaluation needs the prepared data");
  const auto& data = *ctx.data;
  const bool getr = enc.config().getr.enabled;
  if (getr && !ctx.overlap) throw ContractError("GETR evaluation needs an overlap index for neighborhoods");
  const bool sentence = sentence_task(data);
  const std::size_t classes = data.label_set.size();
  const std::size_t per_chunk = getr ? std::max<std::size_t>(1, 320 / ctx.neighborhood) : 64;
  const lexicon::Lexicon* lex = data.lexicon ? &*data.lexicon : nullptr;

  Evaluation ev;
  std::vector<int> golds;
  double loss = 0.0;
  for (std::size_t start = 0; start < split.size(); start += per_chunk) {
    const std::size_t end = std::min(start + per_chunk, split.size());
    std::vector<const EncodedInstance*> members;
    std::vector<int> groups;
    std::vector<std::size_t> anchor_rows;
    for (std::size_t i = start; i < end; ++i) {
      const int group = static_cast<int>(i - start);
      anchor_rows.push_back(members.size());
      members.push_back(&split[i]);
      groups.push_back(group);
      if (getr) {
        const auto nb =
            batching::inference_neighborhood(split[i], *ctx.overlap, ctx.neighborhood, derive_seed(ctx.seed, "nb", i));
        for (const auto& m : nb.neighbors) {
          members.push_back(&member_instance(data, m));
          groups.push_back(group);
        }
      }
    }
    const auto batch = corpus::make_batch(members, groups);
    num::Csr graph;
    if (getr) {
      Rng rng(derive_seed(ctx.seed, "eval-retention", start));
      graph = batch_graph(enc.config(), batch, lex, ctx.edge_retention, rng);
    }
    num::Tape<float> tape(false);
    model::ForwardRequest req;
    req.batch = &batch;
    req.graph = getr ? &graph : nullptr;
    const auto res = enc.forward(tape, req);

    auto score_row = [&](std::size_t row, int gold) {
      if (gold < 0 || static_cast<std::size_t>(gold) >= classes) throw ContractError("evaluation item without a gold label");
      const float* z = res.logits.data() + row * classes;
      const auto best = static_cast<int>(std::max_element(z, z + classes) - z);
      double mx = z[0];
      for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, static_cast<double>(z[c]));
      double s = 0.0;
      for (std::size_t c = 0; c < classes; ++c) s += std::exp(static_cast<double>(z[c]) - mx);
      loss += mx + std::log(s) - static_cast<double>(z[gold]);
      ev.predictions.push_back(best);
      golds.push_back(gold);
    };
    for (std::size_t k = 0; k < anchor_rows.size(); ++k) {
      const auto& inst = split[start + k];
      const std::size_t row = anchor_rows[k];
      if (sentence) {
        score_row(row, inst.label);
      } else {
        for (const auto& [begin, stop] : inst.word_spans) score_row(row * batch.seq_len + begin, inst.piece_tags.at(begin));
      }
    }
  }
  ev.loss = loss / static_cast<double>(golds.size());
  ev.f1 = macro_f1(ev.predictions, golds, classes);
  return ev;
}

batching::BatchingConfig effective_batching(const PreparedData& data, const TrainConfig& cfg, const Method& m) {
  batching::BatchingConfig b = cfg.batching;
  if (!m.getr) b.strategic_fraction = 0.0;
  const std::size_t smaller = std::min(data.lrl_train.size(), data.hrl_train.size());
  if (!m.scratch && smaller > 0 && b.batch_size / 2 > smaller) b.batch_size = 2 * smaller;
  return b;
}

namespace {

EvalContext eval_context(const PreparedData& data, const TrainConfig& cfg, const Method& m,
                         const batching::BatchingConfig& b, const batching::OverlapIndex& overlap) {
  return {m.getr ? &overlap : nullptr, &data, b.eval_neighborhood.value_or(b.batch_size), cfg.edge_retention,
          derive_seed(cfg.seed, "eval")};
}

}  // namespace

std::map<std::string, F1Report> evaluate_splits(const Encoder<float>& enc, const PreparedData& data,
                                                const TrainConfig& cfg, const Method& m) {
  const auto b = effective_batching(data, cfg, m);
  const batching::OverlapIndex overlap(data.hrl_train, data.lrl_train, data.tokenizer,
                                       data.lexicon ? &*data.lexicon : nullptr, b);
  const auto ctx = eval_context(data, cfg, m, b, overlap);
  std::map<std::string, F1Report> out;
  if (!data.lrl_validation.empty()) out["lrl_validation"] = evaluate(enc, data.lrl_validation, ctx).f1;
  if (!data.lrl_test.empty()) out["lrl_test"] = evaluate(enc, data.lrl_test, ctx).f1;
  if (!data.hrl_test.empty()) out["hrl_test"] = evaluate(enc, data.hrl_test, ctx).f1;
  return out;
}

json checkpoint_extra(const PreparedData& data, const Method& m, const TrainConfig& cfg) {
  return {{"method", m.name},
          {"mechanisms", mechanisms_of(m)},
          {"label_set", data.label_set},
          {"tokenizer_pieces", data.tokenizer.pieces()},
          {"train_config", to_json(cfg)}};
}

RunResult train_run(const PreparedData& data, const EncoderConfig& base, const TrainConfig& cfg, const Method& method,
                    const Pretrained* pre) {
  cfg.validate();
  if (method.tet && !data.lexicon) throw PrerequisiteError("method '" + method.name + "' needs a bilingual lexicon");
  if (data.lrl_train.empty() || data.lrl_validation.empty())
    throw ConfigError("training needs LRL train and validation instances");
  if (!method.scratch && data.hrl_train.empty()) throw ConfigError("method '" + method.name + "' needs HRL training data");
  const lexicon::Lexicon* lex = data.lexicon ? &*data.lexicon : nullptr;
  RunResult out;
  const EncoderConfig mcfg = method_config(base, data, method, cfg.seed);
  Encoder<float> enc(mcfg);

  if (!method.scratch) {
    Pretrained local;
    if (!pre) {
      const auto t0 = std::chrono::steady_clock::now();
      local = pretrain(data, base, cfg);
      out.timing.pretrain_seconds = seconds_since(t0);
      pre = &local;
    }
    for (const auto& name : pre->params.names()) {
      if (!enc.params().contains(name)) continue;
      auto& dst = enc.params().at(name);
      const auto& src = pre->params.at(name);
      if (dst.shape() != src.shape()) throw DimensionError("pretrained tensor " + name + " does not fit the model");
      dst.assign(src.values());
    }
  }
  if (method.tet) {
    auto& table = enc.params().at("tok_emb");
    const auto tet = lexicon::tet_initialize<float>(data.lrl_words, data.tokenizer, data.tokenizer, table, *lex,
                                                    cfg.tet_mode, data.hrl_pieces);
    lexicon::apply_tet(tet, table);
    out.report.tet_coverage = tet.coverage;
  }

  const batching::BatchingConfig bcfg = effective_batching(data, cfg, method);
  const batching::OverlapIndex overlap(data.hrl_train, data.lrl_train, data.tokenizer, lex, bcfg);
  const EvalContext ctx = eval_context(data, cfg, method, bcfg, overlap);

  const std::size_t scratch_batch = std::min(bcfg.batch_size, data.lrl_train.size());
  const std::size_t steps_per_epoch =
      method.scratch ? (data.lrl_train.size() + scratch_batch - 1) / scratch_batch
                     : bcfg.batches_per_epoch.value_or((data.hrl_train.size() + bcfg.batch_size / 2 - 1) /
                                                       (bcfg.batch_size / 2));
  const std::size_t total_steps = steps_per_epoch * cfg.epochs;
  const double lr = cfg.learning_rate_for(method);

  AdamWState opt;
  Rng dropout_rng(derive_seed(cfg.seed, "dropout"));
  Rng pair_rng(derive_seed(cfg.seed, "hal-pairs"));
  Rng retention_rng(derive_seed(cfg.seed, "retention"));
  std::size_t step = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  model::ParamStore<float> best_params = enc.params().cast<float>();

  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::vector<const EncodedInstance*>> batches;
    if (method.scratch) {
      Rng order_rng(derive_seed(cfg.seed, "scratch-order", e));
      std::vector<std::size_t> order(data.lrl_train.size());
      std::iota(order.begin(), order.end(), 0);
      shuffle_in_place(order, order_rng);
      for (std::size_t s = 0; s < order.size(); s += scratch_batch) {
        batches.emplace_back();
        for (std::size_t i = s; i < std::min(s + scratch_batch, order.size()); ++i)
          batches.back().push_back(&data.lrl_train[order[i]]);
      }
    } else {
      batching::BatchingConfig ecfg = bcfg;
      ecfg.batches_per_epoch = steps_per_epoch;
      const auto plan = batching::plan_epoch(overlap, ecfg, derive_seed(cfg.seed, "epoch", e));
      for (const auto& b : plan.batches) {
        batches.emplace_back();
        for (const auto& m : b.members) batches.back().push_back(&member_instance(data, m));
      }
    }

    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b, ++step) {
      const auto batch = corpus::make_batch(batches[b]);
      num::Csr graph;
      if (method.getr) graph = batch_graph(mcfg, batch, lex, cfg.edge_retention, retention_rng);
      const double alpha =
          mcfg.hal.mode == model::AlphaMode::Fixed ? mcfg.hal.alpha : model::dynamic_alpha(step, total_steps);
      loss_sum += train_step(enc, opt, batch, method.getr ? &graph : nullptr, data, cfg, lr, dropout_rng, pair_rng,
                             alpha, "epoch " + std::to_string(e + 1) + " batch " + std::to_string(b + 1));
    }

    const auto val = evaluate(enc, data.lrl_validation, ctx);
    if (!std::isfinite(val.loss)) throw NumericError("non-finite validation loss at epoch " + std::to_string(e + 1));
    out.report.epochs.push_back({e + 1, loss_sum / static_cast<double>(batches.size()), val.loss, val.f1.macro});
    if (val.loss < best_loss) {
      best_loss = val.loss;
      best_params = enc.params().cast<float>();
      out.report.best_epoch = e + 1;
    }
    out.timing.epoch_seconds.push_back(seconds_since(t0));
  }

  const Encoder<float> best(mcfg, best_params);
  out.report.method = method.name;
  out.report.mechanisms = mechanisms_of(method);
  out.report.seed = cfg.seed;
  out.report.label_set = data.label_set;
  out.report.parameter_count = model::count_parameters(mcfg);
  out.report.best_val_loss = best_loss;
  out.report.splits = evaluate_splits(best, data, cfg, method);

  out.best.config = mcfg;
  out.best.params = std::move(best_params);
  out.best.extra = checkpoint_extra(data, method, cfg);
  return out;
}

}  // namespace xlb::training
