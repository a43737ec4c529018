// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>

#include "xlb/common/error.hpp"
#include "xlb/corpus/batch.hpp"
#include "xlb/corpus/synthetic.hpp"
#include "xlb/graph/token_graph.hpp"
#include "xlb/model/checkpoint.hpp"
#include "xlb/model/encoder.hpp"

using namespace xlb;
using namespace xlb::model;
using Catch::Matchers::WithinAbs;
using num::Tensor;

namespace {

EncoderConfig small_config(std::size_t vocab, std::uint64_t seed = 3) {
  EncoderConfig cfg;
  cfg.vocab_size = vocab;
  cfg.d_model = 8;
  cfg.num_heads = 2;
  cfg.d_ff = 16;
  cfg.num_layers = 2;
  cfg.max_len = 24;
  cfg.num_labels = 3;
  cfg.seed = seed;
  return cfg;
}

/// A mixed-language batch from a small synthetic corpus, kept alive with its tokenizer.
struct Fixture {
  corpus::SyntheticCorpus data;
  corpus::Tokenizer tok;
  std::vector<corpus::EncodedInstance> encoded;
  corpus::PaddedBatch batch;

  explicit Fixture(std::uint64_t seed, std::size_t per_language = 4,
                   corpus::Task task = corpus::Task::SentenceClassification) {
    corpus::SyntheticSpec spec;
    spec.hrl_vocab_size = 30;
    spec.lrl_vocab_size = 30;
    spec.hrl_sizes = {per_language, 1, 1};
    spec.lrl_sizes = {per_language, 1, 1};
    spec.min_len = 3;
    spec.max_len = 7;
    spec.task = task;
    spec.seed = seed;
    data = corpus::generate_synthetic(spec);
    std::vector<std::string> words;
    for (const auto* ds : {&data.hrl, &data.lrl})
      for (const auto& inst : ds->train) words.insert(words.end(), inst.words.begin(), inst.words.end());
    tok = corpus::Tokenizer::build(words, 60);
    for (const auto* ds : {&data.hrl, &data.lrl})
      for (const auto& inst : ds->train) encoded.push_back(corpus::encode_instance(tok, inst, 24));
    std::vector<const corpus::EncodedInstance*> ptrs;
    for (const auto& e : encoded) ptrs.push_back(&e);
    batch = corpus::make_batch(ptrs);
  }
};

Tensor<double> random_tensor(num::Shape shape, std::uint64_t seed, bool grad = false) {
  Tensor<double> t(std::move(shape));
  Rng rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : t.values()) v = dist(rng);
  if (grad) t.set_requires_grad(true);
  return t;
}

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

/// x @ w for row-major [n, d] x [d, d].
std::vector<double> project(const Tensor<double>& x, const Tensor<double>& w) {
  const std::size_t n = x.dim(0), d = w.dim(0), k = w.dim(1);
  std::vector<double> out(n * k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t c = 0; c < k; ++c) out[i * k + c] += x[i * d + j] * w[j * k + c];
  return out;
}

/// One GAT layer computed literally from the neighbor lists.
std::vector<double> gat_oracle(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>& a_center,
                               const Tensor<double>& a_neighbor, const num::Csr& nbrs) {
  const std::size_t n = x.dim(0), d = w.dim(1);
  const auto z = project(x, w);
  auto dot = [&](const Tensor<double>& a, std::size_t row) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += a[c] * z[row * d + c];
    return s;
  };
  std::vector<double> out(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> e;
    for (std::size_t k = nbrs.offsets[i]; k < nbrs.offsets[i + 1]; ++k) {
      const double raw = dot(a_center, i) + dot(a_neighbor, nbrs.cols[k]);
      e.push_back(raw > 0.0 ? raw : 0.2 * raw);
    }
    const double top = *std::max_element(e.begin(), e.end());
    double total = 0.0;
    for (auto& v : e) total += (v = std::exp(v - top));
    for (std::size_t k = nbrs.offsets[i]; k < nbrs.offsets[i + 1]; ++k)
      for (std::size_t c = 0; c < d; ++c)
        out[i * d + c] += e[k - nbrs.offsets[i]] / total * z[nbrs.cols[k] * d + c];
    for (std::size_t c = 0; c < d; ++c) out[i * d + c] = elu(out[i * d + c]);
  }
  return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

bool rows_equal(const Tensor<double>& a, std::size_t ra, const Tensor<double>& b, std::size_t rb) {
  const std::size_t c = a.dim(1);
  for (std::size_t j = 0; j < c; ++j)
    if (a[ra * c + j] != b[rb * c + j]) return false;
  return true;
}

graph::TokenGraph edgeless(std::size_t n) {
  graph::TokenGraph g;
  g.num_nodes = n;
  g.node_valid.assign(n, 1);
  return g;
}

}  // namespace

TEST_CASE("embedding is token plus position", "[model]") {
  Fixture f(1);
  Encoder<double> enc(small_config(f.tok.size()));
  num::Tape<double> tape;
  for (const char* name : {"tok_emb", "pos_emb"})
    for (auto& v : enc.params().at(name).values()) v = 0.0;
  const auto zero = enc.embed(tape, f.batch);
  for (double v : zero.values()) CHECK(v == 0.0);

  auto& tok = enc.params().at("tok_emb");
  auto& pos = enc.params().at("pos_emb");
  for (std::size_t i = 0; i < tok.size(); ++i) tok[i] = 0.25 * static_cast<double>(i);
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = -0.5 * static_cast<double>(i);
  const auto x = enc.embed(tape, f.batch);
  const std::size_t D = 8, S = f.batch.seq_len;
  for (std::size_t row : {std::size_t{0}, std::size_t{2}, S + 1}) {
    const auto id = static_cast<std::size_t>(f.batch.ids[row]);
    for (std::size_t c = 0; c < D; ++c) CHECK(x[row * D + c] == tok[id * D + c] + pos[(row % S) * D + c]);
  }
}

TEST_CASE("GCN with identity weights", "[model][gcn]") {
  auto cfg = small_config(10);
  cfg.getr.enabled = true;
  cfg.getr.kind = GnnKind::GCN;
  cfg.getr.depth = 1;
  cfg.getr.init = GnnInit::Identity;
  Encoder<double> enc(cfg);
  num::Tape<double> tape;

  // Isolated node: normalized self-loop weight is 1, so the layer is ReLU(h).
  const auto h = random_tensor({1, 8}, 4);
  const auto iso = enc.gnn_stack(tape, h, graph::normalize_adjacency(edgeless(1)));
  for (std::size_t c = 0; c < 8; ++c) CHECK(iso[c] == std::max(0.0, h[c]));

  // Two joined nodes: every weight is 1/2, so both rows become ReLU of the mean.
  auto pair = edgeless(2);
  pair.edges.push_back({0, 1, graph::EdgeOrigin::SharedToken});
  const auto h2 = random_tensor({2, 8}, 5);
  const auto out = enc.gnn_stack(tape, h2, graph::normalize_adjacency(pair));
  for (std::size_t c = 0; c < 8; ++c) {
    const double want = std::max(0.0, 0.5 * (h2[c] + h2[8 + c]));
    CHECK_THAT(out[c], WithinAbs(want, 1e-15));
    CHECK_THAT(out[8 + c], WithinAbs(want, 1e-15));
  }
}

TEST_CASE("GCN layer matches a dense adjacency oracle", "[model][gcn]") {
  Fixture f(2);
  auto cfg = small_config(f.tok.size());
  cfg.getr.enabled = true;
  cfg.getr.kind = GnnKind::GCN;
  cfg.getr.depth = 1;
  cfg.getr.gcn_bias = true;
  Encoder<double> enc(cfg);
  auto& bias = enc.params().at("gnn0.b");
  for (std::size_t i = 0; i < bias.size(); ++i) bias[i] = 0.1 * static_cast<double>(i) - 0.3;
  const auto adj = graph::normalize_adjacency(graph::build_token_graph(f.batch, &f.data.lexicon));
  const std::size_t n = f.batch.nodes(), D = 8;
  std::vector<double> dense(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t e = adj.offsets[i]; e < adj.offsets[i + 1]; ++e) dense[i * n + adj.cols[e]] = adj.weights[e];

  const auto x = random_tensor({n, D}, 6);
  num::Tape<double> tape;
  const auto got = enc.gnn_stack(tape, x, adj);
  const auto z = project(x, enc.params().at("gnn0.w"));
  std::vector<double> want(n * D, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < D; ++c) {
      double s = bias[c];
      for (std::size_t j = 0; j < n; ++j) s += dense[i * n + j] * z[j * D + c];
      want[i * D + c] = std::max(0.0, s);
    }
  CHECK(max_abs_diff(got.values(), want) <= 1e-12);
}

TEST_CASE("GAT oracles", "[model][gat]") {
  Fixture f(3);
  auto cfg = small_config(f.tok.size());
  cfg.getr.enabled = true;
  cfg.getr.kind = GnnKind::GAT;
  cfg.getr.depth = 1;
  Encoder<double> enc(cfg);
  auto& w = enc.params().at("gnn0.w");
  auto& ac = enc.params().at("gnn0.a_center");
  auto& an = enc.params().at("gnn0.a_neighbor");
  num::Tape<double> tape;

  SECTION("isolated node is ELU(Wh)") {
    const auto h = random_tensor({1, 8}, 7);
    const auto out = enc.gnn_stack(tape, h, graph::neighborhoods(edgeless(1)));
    const auto z = project(h, w);
    for (std::size_t c = 0; c < 8; ++c) CHECK_THAT(out[c], WithinAbs(elu(z[c]), 1e-15));
  }
  SECTION("zero score vectors average the neighborhood uniformly") {
    for (auto& v : ac.values()) v = 0.0;
    for (auto& v : an.values()) v = 0.0;
    auto star = edgeless(3);
    star.edges = {{0, 1, graph::EdgeOrigin::Sequential}, {0, 2, graph::EdgeOrigin::Sequential}};
    const auto h = random_tensor({3, 8}, 8);
    const auto out = enc.gnn_stack(tape, h, graph::neighborhoods(star));
    const auto z = project(h, w);
    for (std::size_t c = 0; c < 8; ++c) {
      CHECK_THAT(out[c], WithinAbs(elu((z[c] + z[8 + c] + z[16 + c]) / 3.0), 1e-14));
      CHECK_THAT(out[8 + c], WithinAbs(elu((z[8 + c] + z[c]) / 2.0), 1e-14));
    }
  }
  SECTION("matches the loop oracle on a token graph") {
    const auto nbrs = graph::neighborhoods(graph::build_token_graph(f.batch, &f.data.lexicon));
    const auto x = random_tensor({f.batch.nodes(), 8}, 9);
    const auto got = enc.gnn_stack(tape, x, nbrs);
    CHECK(max_abs_diff(got.values(), gat_oracle(x, w, ac, an, nbrs)) <= 1e-12);

    std::vector<double> coeffs;
    const auto z = Tensor<double>({x.dim(0), 8}, project(x, w));
    num::gat_aggregate(tape, z, num::matvec(tape, z, ac), num::matvec(tape, z, an), nbrs, 0.2, &coeffs);
    REQUIRE(coeffs.size() == nbrs.nnz());
    for (std::size_t i = 0; i < nbrs.rows; ++i) {
      double total = 0.0;
      for (std::size_t e = nbrs.offsets[i]; e < nbrs.offsets[i + 1]; ++e) {
        CHECK(coeffs[e] >= 0.0);
        total += coeffs[e];
      }
      CHECK_THAT(total, WithinAbs(1.0, 1e-12));
    }
  }
}

TEST_CASE("GETR forward needs a graph and only reroutes Q/K", "[model][getr]") {
  Fixture f(4);
  auto cfg = small_config(f.tok.size());
  cfg.getr.enabled = true;
  Encoder<double> enc(cfg);
  num::Tape<double> tape;
  ForwardRequest req;
  req.batch = &f.batch;
  CHECK_THROWS_AS(enc.forward(tape, req), ContractError);

  const auto nbrs = graph::neighborhoods(edgeless(f.batch.nodes()));
  req.graph = &nbrs;
  const auto res = enc.forward(tape, req);
  CHECK(res.logits.dim(0) == f.batch.batch);
  CHECK(res.graph_states.dim(0) == f.batch.nodes());

  // Rerouting Q/K through identical states must reproduce the plain layer.
  const auto x = random_tensor({f.batch.nodes(), 8}, 10);
  const auto plain = enc.layer(tape, "layer1", x, f.batch.layout(), nullptr);
  const auto same = enc.layer(tape, "layer1", x, f.batch.layout(), nullptr, &x);
  CHECK(max_abs_diff(plain.values(), same.values()) == 0.0);
}

TEST_CASE("without cross-sentence edges no gradient flows between sentences", "[model][getr][property]") {
  Fixture f(5);
  auto cfg = small_config(f.tok.size());
  cfg.getr.enabled = true;
  Encoder<double> enc(cfg);
  const auto full = graph::build_token_graph(f.batch, &f.data.lexicon);
  REQUIRE(full.cross_lingual_count() > 0);
  const std::size_t S = f.batch.seq_len, D = 8, B = f.batch.batch;

  // Sum of the block outputs for sentence 0; gradient rows of other sentences.
  auto cross_gradient = [&](double rho) {
    Rng rng(11);
    const auto nbrs = graph::neighborhoods(graph::apply_edge_retention(full, rho, rng));
    num::Tape<double> tape;
    auto x = random_tensor({B * S, D}, 12, true);
    const auto states = enc.gnn_stack(tape, x, nbrs);
    const auto out = enc.layer(tape, "layer1", x, f.batch.layout(), nullptr, &states);
    Tensor<double> weight({B * S, D});
    for (std::size_t i = 0; i < S * D; ++i) weight[i] = 1.0 + 0.01 * static_cast<double>(i);
    tape.backward(num::sum(tape, num::mul(tape, out, weight)));
    double total = 0.0;
    for (std::size_t i = S * D; i < B * S * D; ++i) total += std::abs(x.grad()[i]);
    return total;
  };
  CHECK(cross_gradient(0.0) == 0.0);
  CHECK(cross_gradient(1.0) > 0.0);
}

TEST_CASE("HAL at alpha 0 and 1 reproduces the pure forward bit-exactly", "[model][hal]") {
  for (const auto task : {corpus::Task::SentenceClassification, corpus::Task::SequenceLabeling}) {
    Fixture f(6, 4, task);
    auto cfg = small_config(f.tok.size());
    cfg.task = task;
    cfg.hal.enabled = true;
    Encoder<double> enc(cfg);
    Rng rng(13);
    const auto pairs = make_hal_pairs(f.batch, rng);
    REQUIRE(pairs.size() == 4);
    for (double alpha : {0.0, 1.0}) {
      num::Tape<double> tape;
      ForwardRequest req;
      req.batch = &f.batch;
      req.hal_pairs = &pairs;
      req.alpha = alpha;
      const auto res = enc.forward(tape, req);
      const std::size_t S = f.batch.seq_len;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const std::size_t src = alpha == 0.0 ? pairs[p].lrl_row : pairs[p].hrl_row;
        if (task == corpus::Task::SentenceClassification) {
          CHECK(rows_equal(res.aug_logits, p, res.logits, src));
        } else {
          // Mixed positions follow the source; alpha 0 also keeps the unmixed LRL tail.
          for (std::size_t s = 0; s < S; ++s) {
            const std::size_t r = p * S + s;
            const bool mixed = s < std::min(f.batch.lengths[pairs[p].lrl_row], f.batch.lengths[pairs[p].hrl_row]);
            if (alpha == 0.0 && s < f.batch.lengths[pairs[p].lrl_row])
              CHECK(rows_equal(res.aug_logits, r, res.logits, pairs[p].lrl_row * S + s));
            if (alpha == 1.0 && mixed) CHECK(rows_equal(res.aug_logits, r, res.logits, pairs[p].hrl_row * S + s));
          }
        }
      }
    }
  }
}

TEST_CASE("mixed labels stay on the simplex", "[model][hal][property]") {
  Rng rng(14);
  std::uniform_int_distribution<std::size_t> classes(2, 9);
  for (int draw = 0; draw < 1000; ++draw) {
    const std::size_t c = classes(rng);
    std::vector<double> a(c), b(c);
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
      sa += a[i] = uniform01(rng);
      sb += b[i] = uniform01(rng);
    }
    for (std::size_t i = 0; i < c; ++i) {
      a[i] /= sa;
      b[i] /= sb;
    }
    const double alpha = uniform01(rng);
    const auto y = mix_labels(a, b, alpha);
    double total = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
      CHECK(y[i] >= std::min(a[i], b[i]) - 1e-15);
      CHECK(y[i] <= std::max(a[i], b[i]) + 1e-15);
      total += y[i];
    }
    CHECK(std::abs(total - 1.0) <= 1e-6);
  }
  const std::vector<double> one_hot_h{0, 1}, one_hot_l{1, 0};
  CHECK(mix_labels(one_hot_h, one_hot_l, 0.2) == std::vector<double>{0.8, 0.2});
  CHECK_THROWS_AS(mix_labels(one_hot_h, one_hot_l, 1.5), ContractError);
}

TEST_CASE("dynamic mixing schedule", "[model][hal]") {
  CHECK(dynamic_alpha(0, 10) == 1.0);
  CHECK(dynamic_alpha(5, 10) == 0.5);
  CHECK(dynamic_alpha(10, 10) == 0.0);
  CHECK_THROWS_AS(dynamic_alpha(0, 0), ContractError);
  CHECK_THROWS_AS(dynamic_alpha(11, 10), ContractError);
}

TEST_CASE("HAL emits one augmented sample per LRL sentence", "[model][hal]") {
  Fixture f(7, 5);
  auto cfg = small_config(f.tok.size());
  cfg.hal.enabled = true;
  Encoder<double> enc(cfg);
  Rng rng(15);
  const auto pairs = make_hal_pairs(f.batch, rng);
  CHECK(pairs.size() == 5);
  for (const auto& p : pairs) {
    CHECK(f.batch.languages[p.lrl_row] == corpus::Language::LRL);
    CHECK(f.batch.languages[p.hrl_row] == corpus::Language::HRL);
  }
  num::Tape<double> tape;
  ForwardRequest req;
  req.batch = &f.batch;
  req.hal_pairs = &pairs;
  req.alpha = 0.2;
  CHECK(enc.forward(tape, req).aug_logits.dim(0) == 5);

  Encoder<double> plain(small_config(f.tok.size()));
  CHECK_THROWS_AS(plain.forward(tape, req), ContractError);
}

TEST_CASE("sequence task logits cover every position", "[model]") {
  Fixture f(8, 3, corpus::Task::SequenceLabeling);
  auto cfg = small_config(f.tok.size());
  cfg.task = corpus::Task::SequenceLabeling;
  Encoder<double> enc(cfg);
  num::Tape<double> tape;
  ForwardRequest req;
  req.batch = &f.batch;
  const auto res = enc.forward(tape, req);
  CHECK(res.logits.dim(0) == f.batch.batch * f.batch.seq_len);
  CHECK(res.logits.dim(1) == 3);
}

TEST_CASE("disabled mechanisms leave the baseline forward untouched", "[model]") {
  Fixture f(9);
  const auto base_cfg = small_config(f.tok.size());
  auto off = base_cfg;
  off.getr.kind = GnnKind::GCN;
  off.getr.depth = 3;
  off.hal.depth = 3;
  off.hal.alpha = 0.7;
  Encoder<double> a(base_cfg), b(off);
  num::Tape<double> tape;
  ForwardRequest req;
  req.batch = &f.batch;
  const auto la = a.forward(tape, req).logits, lb = b.forward(tape, req).logits;
  CHECK(max_abs_diff(la.values(), lb.values()) == 0.0);
}

TEST_CASE("initialization is deterministic per seed", "[model][determinism]") {
  const auto cfg = small_config(20);
  const auto a = init_params<double>(cfg), b = init_params<double>(cfg);
  for (const auto& name : a.names()) CHECK(max_abs_diff(a.at(name).values(), b.at(name).values()) == 0.0);
  auto other = cfg;
  other.seed = 4;
  CHECK(max_abs_diff(a.at("layer0.wq").values(), init_params<double>(other).at("layer0.wq").values()) > 0.0);
}

TEST_CASE("parameter counts follow the closed form", "[model][params]") {
  EncoderConfig emb_only;
  emb_only.vocab_size = 10;
  emb_only.d_model = 4;
  emb_only.num_heads = 1;
  emb_only.num_layers = 0;
  emb_only.max_len = 6;
  emb_only.num_labels = 2;
  CHECK(count_parameters(emb_only) == 10 * 4 + 6 * 4 + (4 * 2 + 2));

  auto cfg = small_config(30);
  const std::uint64_t d = 8, f = 16;
  const std::uint64_t per_layer = 4 * (d * d + d) + 4 * d + (d * f + f) + (f * d + d);
  CHECK(count_parameters(cfg) == 30 * d + 24 * d + 2 * per_layer + d * 3 + 3);

  cfg.getr.enabled = true;
  cfg.getr.kind = GnnKind::GCN;
  cfg.getr.depth = 1;
  const auto one = count_parameters(cfg);
  cfg.getr.depth = 2;
  CHECK(count_parameters(cfg) - one == d * d);
  cfg.getr.gcn_bias = true;
  CHECK(count_parameters(cfg) - one == d * d + 2 * d);
  cfg.getr.kind = GnnKind::GAT;
  CHECK(count_parameters(cfg) - one == 2 * (d * d + 2 * d) - d * d);
}

TEST_CASE("parameter count equals the allocated size", "[model][params][property]") {
  Rng rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    EncoderConfig cfg;
    cfg.num_heads = 1 + uniform_index(rng, 3);
    cfg.d_model = cfg.num_heads * (1 + uniform_index(rng, 4));
    cfg.d_ff = 1 + uniform_index(rng, 20);
    cfg.vocab_size = 4 + uniform_index(rng, 30);
    cfg.max_len = 2 + uniform_index(rng, 10);
    cfg.num_layers = 1 + uniform_index(rng, 3);
    cfg.num_labels = 2 + uniform_index(rng, 4);
    cfg.getr.enabled = uniform01(rng) < 0.5;
    cfg.getr.kind = uniform01(rng) < 0.5 ? GnnKind::GCN : GnnKind::GAT;
    cfg.getr.gcn_bias = uniform01(rng) < 0.5;
    cfg.getr.depth = 1 + uniform_index(rng, 3);
    cfg.hal.enabled = uniform01(rng) < 0.5;
    cfg.hal.depth = 1 + uniform_index(rng, 3);
    INFO("trial " << trial);
    CHECK(count_parameters(cfg) == init_params<float>(cfg).total_size());
  }
}

TEST_CASE("checkpoint round trip", "[model][checkpoint]") {
  auto cfg = small_config(15);
  cfg.getr.enabled = true;
  cfg.hal.enabled = true;
  Checkpoint ckpt{cfg, init_params<float>(cfg), {{"method", "getr_gat"}}};
  const auto path = std::filesystem::temp_directory_path() / "xlb_test_ckpt.json";
  save_checkpoint(ckpt, path);
  const auto back = load_checkpoint(path);
  std::filesystem::remove(path);
  CHECK(to_json(back.config) == to_json(cfg));
  CHECK(back.extra == ckpt.extra);
  REQUIRE(back.params.names() == ckpt.params.names());
  for (const auto& name : ckpt.params.names()) {
    const auto& a = ckpt.params.at(name);
    const auto& b = back.params.at(name);
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin(), b.values().end()));
  }

  auto j = checkpoint_to_json(ckpt);
  j["config"]["d_model"] = 16;
  CHECK_THROWS(checkpoint_from_json(j));
}
