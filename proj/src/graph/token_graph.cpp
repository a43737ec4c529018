// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/graph/token_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "xlb/common/error.hpp"

namespace xlb::graph {

using corpus::Language;
using corpus::PaddedBatch;
using corpus::Tokenizer;

std::string_view to_string(EdgeOrigin origin) {
  switch (origin) {
    case EdgeOrigin::Sequential: return "sequential";
    case EdgeOrigin::SharedToken: return "shared_token";
    case EdgeOrigin::Translation: return "translation";
  }
  return "unknown";
}

std::size_t TokenGraph::count(EdgeOrigin origin) const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [origin](const Edge& e) { return e.origin == origin; }));
}

std::size_t TokenGraph::cross_lingual_count() const {
  return edges.size() - count(EdgeOrigin::Sequential);
}

namespace {

class EdgeSet {
 public:
  explicit EdgeSet(TokenGraph& g) : g_(g) {}

  void add(std::size_t i, std::size_t j, EdgeOrigin origin) {
    if (i == j) return;
    if (i > j) std::swap(i, j);
    if (seen_.insert(i * g_.num_nodes + j).second) g_.edges.push_back({i, j, origin});
  }

 private:
  TokenGraph& g_;
  std::unordered_set<std::size_t> seen_;
};

void check_spans(const PaddedBatch& batch) {
  if (batch.ids.size() != batch.nodes() || batch.lengths.size() != batch.batch ||
      batch.word_spans.size() != batch.batch || batch.words.size() != batch.batch ||
      batch.languages.size() != batch.batch || batch.groups.size() != batch.batch)
    throw GraphError("batch fields disagree with its B x S layout");
  for (std::size_t s = 0; s < batch.batch; ++s) {
    const std::size_t len = batch.lengths[s];
    if (len == 0 || len > batch.seq_len) throw GraphError("sentence length outside 1..S");
    if (batch.words[s].size() != batch.word_spans[s].size())
      throw GraphError("sentence " + std::to_string(s) + ": word and span counts differ");
    std::size_t expect = 1;  // position 0 is CLS
    for (const auto& [b, e] : batch.word_spans[s]) {
      if (b != expect || e <= b) throw GraphError("sentence " + std::to_string(s) + ": spans do not tile the sentence");
      expect = e;
    }
    if (expect != len) throw GraphError("sentence " + std::to_string(s) + ": spans do not cover its length");
  }
}

}  // namespace

TokenGraph build_token_graph(const PaddedBatch& batch, const lexicon::Lexicon* lex) {
  check_spans(batch);
  const std::size_t s_len = batch.seq_len;
  TokenGraph g;
  g.num_nodes = batch.nodes();
  g.node_valid.resize(g.num_nodes);
  for (std::size_t n = 0; n < g.num_nodes; ++n) g.node_valid[n] = batch.valid(n) ? 1 : 0;
  EdgeSet set(g);

  for (std::size_t s = 0; s < batch.batch; ++s)
    for (std::size_t p = 0; p + 1 < batch.lengths[s]; ++p) set.add(s * s_len + p, s * s_len + p + 1, EdgeOrigin::Sequential);

  // Occurrences of each non-special id, per group, in position order.
  std::map<std::pair<int, corpus::PieceId>, std::vector<std::size_t>> occurrences;
  for (std::size_t s = 0; s < batch.batch; ++s) {
    for (std::size_t p = 0; p < batch.lengths[s]; ++p) {
      const auto id = batch.ids[s * s_len + p];
      if (!Tokenizer::is_special(id)) occurrences[{batch.groups[s], id}].push_back(s * s_len + p);
    }
  }
  for (const auto& [key, nodes] : occurrences) {
    for (std::size_t x = 0; x < nodes.size(); ++x)
      for (std::size_t y = x + 1; y < nodes.size(); ++y)
        if (nodes[x] / s_len != nodes[y] / s_len) set.add(nodes[x], nodes[y], EdgeOrigin::SharedToken);
  }

  if (lex && !lex->empty()) {
    // HRL word surface -> (sentence, word index) occurrences per group.
    std::map<std::pair<int, std::string_view>, std::vector<std::pair<std::size_t, std::size_t>>> hrl_words;
    for (std::size_t s = 0; s < batch.batch; ++s) {
      if (batch.languages[s] != Language::HRL) continue;
      for (std::size_t w = 0; w < batch.words[s].size(); ++w)
        hrl_words[{batch.groups[s], batch.words[s][w]}].emplace_back(s, w);
    }
    for (std::size_t s = 0; s < batch.batch; ++s) {
      if (batch.languages[s] != Language::LRL) continue;
      for (std::size_t w = 0; w < batch.words[s].size(); ++w) {
        const auto translation = lex->translate(batch.words[s][w]);
        if (!translation) continue;
        auto it = hrl_words.find({batch.groups[s], *translation});
        if (it == hrl_words.end()) continue;
        const auto [lb, le] = batch.word_spans[s][w];
        for (const auto& [hs, hw] : it->second) {
          const auto [hb, he] = batch.word_spans[hs][hw];
          for (std::size_t p = lb; p < le; ++p)
            for (std::size_t q = hb; q < he; ++q) set.add(s * s_len + p, hs * s_len + q, EdgeOrigin::Translation);
        }
      }
    }
  }
  return g;
}

TokenGraph apply_edge_retention(const TokenGraph& g, double rho, Rng& rng) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("edge retention must be in [0, 1]");
  std::vector<std::size_t> cross;
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (g.edges[e].origin != EdgeOrigin::Sequential) cross.push_back(e);
  const auto keep = static_cast<std::size_t>(std::llround(rho * static_cast<double>(cross.size())));
  // Partial Fisher-Yates: the first `keep` slots form a uniform subset.
  for (std::size_t i = 0; i < keep && i + 1 < cross.size(); ++i) {
    const std::size_t j = i + uniform_index(rng, cross.size() - i);
    std::swap(cross[i], cross[j]);
  }
  std::vector<std::uint8_t> kept(g.edges.size(), 1);
  for (std::size_t i = keep; i < cross.size(); ++i) kept[cross[i]] = 0;

  TokenGraph out;
  out.num_nodes = g.num_nodes;
  out.node_valid = g.node_valid;
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (kept[e]) out.edges.push_back(g.edges[e]);
  return out;
}

namespace {

std::vector<std::vector<std::size_t>> adjacency_lists(const TokenGraph& g) {
  std::vector<std::vector<std::size_t>> adj(g.num_nodes);
  for (const auto& e : g.edges) {
    if (e.a >= g.num_nodes || e.b >= g.num_nodes) throw GraphError("edge endpoint outside the graph");
    if (!g.node_valid[e.a] || !g.node_valid[e.b]) throw GraphError("edge touches a padding node");
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    adj[i].push_back(i);
    std::sort(adj[i].begin(), adj[i].end());
  }
  return adj;
}

}  // namespace

num::Csr normalize_adjacency(const TokenGraph& g) {
  const auto adj = adjacency_lists(g);
  std::vector<double> inv_sqrt(g.num_nodes);
  for (std::size_t i = 0; i < g.num_nodes; ++i) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(adj[i].size()));
  num::Csr csr;
  csr.rows = g.num_nodes;
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    for (std::size_t j : adj[i]) {
      csr.cols.push_back(j);
      csr.weights.push_back(inv_sqrt[i] * inv_sqrt[j]);
    }
    csr.offsets.push_back(csr.cols.size());
  }
  return csr;
}

num::Csr neighborhoods(const TokenGraph& g) {
  const auto adj = adjacency_lists(g);
  num::Csr csr;
  csr.rows = g.num_nodes;
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    csr.cols.insert(csr.cols.end(), adj[i].begin(), adj[i].end());
    csr.offsets.push_back(csr.cols.size());
  }
  csr.weights.assign(csr.cols.size(), 1.0);
  return csr;
}

void dump_graph(const TokenGraph& g, std::ostream& out) {
  for (const auto& e : g.edges) out << e.a << ' ' << e.b << ' ' << to_string(e.origin) << '\n';
}

}  // namespace xlb::graph
