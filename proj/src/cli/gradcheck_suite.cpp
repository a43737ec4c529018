// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/cli/gradcheck_suite.hpp"

#include <cstdio>
#include <functional>
#include <ostream>

#include "xlb/common/rng.hpp"
#include "xlb/corpus/batch.hpp"
#include "xlb/graph/token_graph.hpp"
#include "xlb/model/encoder.hpp"
#include "xlb/numerics/gradcheck.hpp"
#include "xlb/training/losses.hpp"

namespace xlb::cli {

using num::Tape;
using num::Tensor;
using TensorD = Tensor<double>;

namespace {

TensorD random_tensor(num::Shape shape, Rng& rng, double scale = 1.0) {
  TensorD t(std::move(shape));
  std::normal_distribution<double> dist(0.0, scale);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

/// Scalar probe sum(out * weights) with fixed random weights.
TensorD probe(Tape<double>& tape, const TensorD& out, const TensorD& weights) {
  return num::sum(tape, num::mul(tape, out, weights));
}

model::EncoderConfig small_config(Rng& rng, corpus::Task task) {
  model::EncoderConfig cfg;
  cfg.task = task;
  cfg.vocab_size = 8 + uniform_index(rng, 6);
  cfg.num_heads = 1 + uniform_index(rng, 2);
  cfg.d_model = cfg.num_heads * (2 + uniform_index(rng, 3));
  cfg.d_ff = 4 + uniform_index(rng, 5);
  cfg.num_layers = 1 + uniform_index(rng, 2);
  cfg.max_len = 8;
  cfg.num_labels = 2 + uniform_index(rng, 2);
  cfg.dropout = 0.0;
  cfg.init_std = 0.4;
  cfg.seed = rng();
  return cfg;
}

/// Random mixed-language batch whose ids reuse a small alphabet (so shared-token edges appear).
corpus::PaddedBatch random_batch(Rng& rng, const model::EncoderConfig& cfg, std::size_t sentences) {
  std::vector<corpus::EncodedInstance> insts(sentences);
  for (std::size_t s = 0; s < sentences; ++s) {
    auto& e = insts[s];
    e.language = s % 2 ? corpus::Language::HRL : corpus::Language::LRL;
    e.ids.push_back(corpus::Tokenizer::kCls);
    const std::size_t len = 2 + uniform_index(rng, cfg.max_len - 2);
    for (std::size_t p = 1; p < len; ++p) {
      const auto id = static_cast<corpus::PieceId>(3 + uniform_index(rng, cfg.vocab_size - 3));
      e.ids.push_back(id);
      e.word_spans.emplace_back(p, p + 1);
      e.words.push_back("w" + std::to_string(id));
      e.piece_tags.push_back(static_cast<int>(uniform_index(rng, cfg.num_labels)));
    }
    e.piece_tags.insert(e.piece_tags.begin(), -1);
    e.label = static_cast<int>(uniform_index(rng, cfg.num_labels));
  }
  std::vector<const corpus::EncodedInstance*> ptrs;
  for (const auto& e : insts) ptrs.push_back(&e);
  return corpus::make_batch(ptrs);
}

std::vector<TensorD> all_params(model::ParamStore<double>& p) {
  std::vector<TensorD> out;
  for (const auto& n : p.names()) out.push_back(p.at(n));
  return out;
}

using CaseFn = std::function<double(Rng&, const GradcheckOptions&)>;

double check_embedding(Rng& rng, const GradcheckOptions&) {
  const std::size_t v = 4 + uniform_index(rng, 8), d = 1 + uniform_index(rng, 6), n = 1 + uniform_index(rng, 10);
  TensorD table = random_tensor({v, d}, rng);
  std::vector<std::int32_t> ids(n);
  for (auto& id : ids) id = static_cast<std::int32_t>(uniform_index(rng, v));
  TensorD w = random_tensor({n, d}, rng);
  return num::finite_diff_check(
      [&](Tape<double>& t) { return probe(t, num::embedding(t, table, std::span<const std::int32_t>(ids)), w); }, table);
}

double check_transformer_layer(Rng& rng, const GradcheckOptions&) {
  auto cfg = small_config(rng, corpus::Task::SentenceClassification);
  model::Encoder<double> enc(cfg);
  const auto batch = random_batch(rng, cfg, 2 + uniform_index(rng, 2));
  TensorD x = random_tensor({batch.nodes(), cfg.d_model}, rng);
  TensorD w = random_tensor({batch.nodes(), cfg.d_model}, rng);
  auto inputs = all_params(enc.params());
  inputs.push_back(x);
  return num::finite_diff_check(
      [&](Tape<double>& t) { return probe(t, enc.layer(t, "layer0", x, batch.layout(), nullptr), w); }, inputs);
}

double check_gnn(Rng& rng, model::GnnKind kind, bool corrupt) {
  auto cfg = small_config(rng, corpus::Task::SentenceClassification);
  cfg.getr.enabled = true;
  cfg.getr.kind = kind;
  cfg.getr.depth = 1 + uniform_index(rng, 2);
  cfg.getr.gcn_bias = uniform_index(rng, 2) == 1;
  model::Encoder<double> enc(cfg);
  const auto batch = random_batch(rng, cfg, 2 + uniform_index(rng, 3));
  const auto g = graph::build_token_graph(batch, nullptr);
  const auto csr = kind == model::GnnKind::GCN ? graph::normalize_adjacency(g) : graph::neighborhoods(g);
  TensorD x = random_tensor({batch.nodes(), cfg.d_model}, rng);
  TensorD w = random_tensor({batch.nodes(), cfg.d_model}, rng);
  std::vector<TensorD> inputs{x};
  for (const auto& n : enc.params().names())
    if (n.starts_with("gnn")) inputs.push_back(enc.params().at(n));
  return num::finite_diff_check([&](Tape<double>& t) { return probe(t, enc.gnn_stack(t, x, csr, corrupt), w); },
                                inputs);
}

double check_getr_block(Rng& rng, const GradcheckOptions& opts) {
  auto cfg = small_config(rng, uniform_index(rng, 2) ? corpus::Task::SentenceClassification
                                                     : corpus::Task::SequenceLabeling);
  cfg.getr.enabled = true;
  cfg.getr.kind = uniform_index(rng, 2) ? model::GnnKind::GAT : model::GnnKind::GCN;
  cfg.getr.depth = 1 + uniform_index(rng, 2);
  cfg.getr.insertion_index = uniform_index(rng, cfg.num_layers);
  model::Encoder<double> enc(cfg);
  const auto batch = random_batch(rng, cfg, 2 + uniform_index(rng, 3));
  const auto g = graph::build_token_graph(batch, nullptr);
  const auto csr = cfg.getr.kind == model::GnnKind::GCN ? graph::normalize_adjacency(g) : graph::neighborhoods(g);
  const std::size_t rows = cfg.task == corpus::Task::SentenceClassification ? batch.batch : batch.nodes();
  TensorD w = random_tensor({rows, cfg.num_labels}, rng);
  model::ForwardRequest req;
  req.batch = &batch;
  req.graph = &csr;
  req.detach_gat_scores = opts.corrupt_gat;
  return num::finite_diff_check([&](Tape<double>& t) { return probe(t, enc.forward(t, req).logits, w); },
                                all_params(enc.params()));
}

double check_hal_mix(Rng& rng, const GradcheckOptions&) {
  const bool sentence = uniform_index(rng, 2) == 1;
  auto cfg = small_config(rng, sentence ? corpus::Task::SentenceClassification : corpus::Task::SequenceLabeling);
  cfg.hal.enabled = true;
  cfg.hal.depth = 1 + uniform_index(rng, 2);
  model::Encoder<double> enc(cfg);
  const auto batch = random_batch(rng, cfg, 2 + 2 * uniform_index(rng, 2));
  Rng pair_rng(rng());
  const auto pairs = model::make_hal_pairs(batch, pair_rng);
  const double alpha = 0.05 + 0.9 * uniform01(rng);
  model::ForwardRequest req;
  req.batch = &batch;
  req.hal_pairs = &pairs;
  req.alpha = alpha;
  // Soft targets for the augmented rows (KL), plus a probe on the real logits.
  Tape<double> shape_tape(false);
  const auto shapes = enc.forward(shape_tape, req);
  std::vector<double> soft(shapes.aug_logits.size());
  for (std::size_t r = 0; r < shapes.aug_logits.dim(0); ++r) {
    const auto y = model::mix_labels(std::vector<double>(cfg.num_labels, 1.0 / static_cast<double>(cfg.num_labels)),
                                     [&] {
                                       std::vector<double> v(cfg.num_labels, 0.0);
                                       v[uniform_index(rng, cfg.num_labels)] = 1.0;
                                       return v;
                                     }(),
                                     alpha);
    std::copy(y.begin(), y.end(), soft.begin() + static_cast<std::ptrdiff_t>(r * cfg.num_labels));
  }
  TensorD w = random_tensor(shapes.logits.shape(), rng);
  const auto mask = shapes.aug_row_mask;
  return num::finite_diff_check(
      [&](Tape<double>& t) {
        const auto res = enc.forward(t, req);
        auto kl = training::kl_divergence_loss(t, res.aug_logits, std::span<const double>(soft),
                                               std::span<const std::uint8_t>(mask));
        return num::add(t, kl, probe(t, res.logits, w));
      },
      all_params(enc.params()));
}

double check_cross_entropy(Rng& rng, const GradcheckOptions&) {
  const std::size_t n = 1 + uniform_index(rng, 8), c = 2 + uniform_index(rng, 4);
  TensorD logits = random_tensor({n, c}, rng, 2.0);
  std::vector<int> labels(n);
  std::vector<std::uint8_t> mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(uniform_index(rng, c));
    mask[i] = i == 0 || uniform_index(rng, 4) != 0;
  }
  return num::finite_diff_check(
      [&](Tape<double>& t) {
        return training::cross_entropy_loss(t, logits, std::span<const int>(labels), std::span<const std::uint8_t>(mask));
      },
      logits);
}

double check_kl(Rng& rng, const GradcheckOptions&) {
  const std::size_t n = 1 + uniform_index(rng, 8), c = 2 + uniform_index(rng, 4);
  TensorD logits = random_tensor({n, c}, rng, 2.0);
  std::vector<double> soft(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += soft[i * c + j] = uniform_index(rng, 3) ? uniform01(rng) : 0.0;
    if (s == 0.0) soft[i * c] = s = 1.0;
    for (std::size_t j = 0; j < c; ++j) soft[i * c + j] /= s;
  }
  return num::finite_diff_check(
      [&](Tape<double>& t) { return training::kl_divergence_loss(t, logits, std::span<const double>(soft)); }, logits);
}

}  // namespace

std::vector<KindResult> run_gradcheck_suite(const GradcheckOptions& opts) {
  const std::vector<std::pair<std::string, CaseFn>> kinds{
      {"embedding", check_embedding},
      {"transformer_layer", check_transformer_layer},
      {"gcn", [](Rng& r, const GradcheckOptions&) { return check_gnn(r, model::GnnKind::GCN, false); }},
      {"gat", [](Rng& r, const GradcheckOptions& o) { return check_gnn(r, model::GnnKind::GAT, o.corrupt_gat); }},
      {"getr_block", check_getr_block},
      {"hal_mix", check_hal_mix},
      {"cross_entropy", check_cross_entropy},
      {"kl_divergence", check_kl},
  };
  std::vector<KindResult> out;
  for (const auto& [name, fn] : kinds) {
    KindResult r{name, opts.configs_per_kind, 0.0, false};
    for (std::size_t i = 0; i < opts.configs_per_kind; ++i) {
      Rng rng(derive_seed(opts.seed, name, i));
      r.max_error = std::max(r.max_error, fn(rng, opts));
    }
    r.passed = r.max_error <= opts.tolerance;
    out.push_back(r);
  }
  return out;
}

void print_gradcheck(const std::vector<KindResult>& results, std::ostream& out) {
  char line[160];
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-18s configs=%-3zu max_rel_error=%.3e %s\n", r.kind.c_str(), r.configs,
                  r.max_error, r.passed ? "PASS" : "FAIL");
    out << line;
  }
}

}  // namespace xlb::cli
