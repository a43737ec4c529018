// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_GRAPH_TOKEN_GRAPH_HPP
#define XLB_GRAPH_TOKEN_GRAPH_HPP

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "xlb/common/rng.hpp"
#include "xlb/corpus/batch.hpp"
#include "xlb/lexicon/lexicon.hpp"
#include "xlb/numerics/ops.hpp"

namespace xlb::graph {

enum class EdgeOrigin : std::uint8_t { Sequential, SharedToken, Translation };

std::string_view to_string(EdgeOrigin origin);

/// Undirected edge between flattened positions, stored with a < b.
struct Edge {
  std::size_t a = 0;
  std::size_t b = 0;
  EdgeOrigin origin = EdgeOrigin::Sequential;

  bool operator==(const Edge&) const = default;
};

struct TokenGraph {
  std::size_t num_nodes = 0;
  std::vector<Edge> edges;
  std::vector<std::uint8_t> node_valid;

  std::size_t count(EdgeOrigin origin) const;
  /// Edges that cross sentence boundaries (shared-token and translation).
  std::size_t cross_lingual_count() const;
};

/**
 * Token graph of a padded batch.
 *
 * Sequential edges chain consecutive valid positions of each sentence, CLS
 * first. Shared-token edges join every pair of positions in different
 * sentences of the same group that hold the same non-special id.
 * Translation edges join every piece of an LRL word to every piece of each
 * occurrence of its lexicon translation in HRL sentences of the same group.
 * A pair linked for several reasons keeps the first origin in that order.
 * A null lexicon yields no translation edges.
 */
TokenGraph build_token_graph(const corpus::PaddedBatch& batch, const lexicon::Lexicon* lex);

/// Keeps a uniform random subset of exactly round(rho * m) of the m
/// cross-sentence edges; sequential edges are always kept.
TokenGraph apply_edge_retention(const TokenGraph& g, double rho, Rng& rng);

/// D^-1/2 (A + I) D^-1/2 over valid nodes; invalid nodes keep a unit self-loop.
num::Csr normalize_adjacency(const TokenGraph& g);

/// Per-node neighbor lists including the node itself (invalid nodes: self only).
num::Csr neighborhoods(const TokenGraph& g);

/// One `i j origin` line per edge.
void dump_graph(const TokenGraph& g, std::ostream& out);

}  // namespace xlb::graph

#endif  // XLB_GRAPH_TOKEN_GRAPH_HPP
