// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations used by the unit and acceptance tests.
// They favor the most literal computation over speed and share no code with
// the library beyond tokenization.

#ifndef XLB_TESTS_ORACLES_HPP
#define XLB_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xlb/common/rng.hpp"
#include "xlb/corpus/tokenizer.hpp"
#include "xlb/lexicon/lexicon.hpp"
#include "xlb/lexicon/tet.hpp"
#include "xlb/numerics/tensor.hpp"

namespace xlb::oracle {

struct TetOracle {
  std::map<corpus::PieceId, std::vector<double>> rows;
  std::set<corpus::PieceId> uncovered;
};

/// Materializes every (word, piece) membership pair, then averages, per
/// piece, the mean translated-piece embedding of each distinct translatable
/// word holding it.
inline TetOracle tet_brute_force(const std::vector<std::string>& vocab, const corpus::Tokenizer& lrl_tok,
                                 const corpus::Tokenizer& hrl_tok, const num::Tensor<double>& hrl_emb,
                                 const lexicon::Lexicon& lex, const std::set<corpus::PieceId>& skip = {}) {
  const std::size_t d = hrl_emb.dim(1);
  std::vector<std::pair<std::string, corpus::PieceId>> membership;
  for (const auto& w : vocab)
    for (corpus::PieceId p : lrl_tok.encode_word(w))
      if (p >= static_cast<corpus::PieceId>(corpus::Tokenizer::kNumSpecials) && !skip.count(p))
        membership.emplace_back(w, p);

  std::set<corpus::PieceId> pieces;
  for (const auto& [w, p] : membership) pieces.insert(p);

  TetOracle out;
  for (corpus::PieceId p : pieces) {
    std::set<std::string> holders;
    for (const auto& [w, q] : membership)
      if (q == p && lex.translate(w)) holders.insert(w);
    if (holders.empty()) {
      out.uncovered.insert(p);
      continue;
    }
    std::vector<double> row(d, 0.0);
    for (const auto& w : holders) {
      const auto target = hrl_tok.encode_word(*lex.translate(w));
      for (std::size_t c = 0; c < d; ++c) {
        double s = 0.0;
        for (corpus::PieceId u : target) s += hrl_emb[static_cast<std::size_t>(u) * d + c];
        row[c] += s / static_cast<double>(target.size()) / static_cast<double>(holders.size());
      }
    }
    out.rows[p] = row;
  }
  return out;
}

/// Largest absolute difference between a TET result and the oracle; infinity
/// when they disagree on which pieces are covered.
inline double tet_max_diff(const lexicon::TetResult& got, const TetOracle& want) {
  if (got.rows.size() != want.rows.size()) return INFINITY;
  if (std::set<corpus::PieceId>(got.uncovered.begin(), got.uncovered.end()) != want.uncovered) return INFINITY;
  double worst = 0.0;
  for (const auto& [p, row] : want.rows) {
    const auto it = got.rows.find(p);
    if (it == got.rows.end() || it->second.size() != row.size()) return INFINITY;
    for (std::size_t c = 0; c < row.size(); ++c) worst = std::max(worst, std::abs(it->second[c] - row[c]));
  }
  return worst;
}

/// A random TET case: syllable-built LRL words with overlapping pieces, a
/// random partial lexicon into syllable-built HRL words, and a random HRL table.
struct TetCase {
  std::vector<std::string> vocab;
  corpus::Tokenizer lrl_tok, hrl_tok;
  lexicon::Lexicon lex;
  num::Tensor<double> hrl_emb;
};

inline TetCase random_tet_case(std::uint64_t seed, std::size_t words = 20, std::size_t dim = 6) {
  Rng rng(seed);
  static const std::vector<std::string> lrl_syllables{"ka", "ma", "ri", "so", "tu", "ne", "pa", "li"};
  static const std::vector<std::string> hrl_syllables{"ba", "de", "fo", "gi", "hu", "jo", "ve", "wy"};
  auto make_word = [&](const std::vector<std::string>& syl) {
    std::string w;
    const std::size_t n = 1 + uniform_index(rng, 3);
    for (std::size_t i = 0; i < n; ++i) w += syl[uniform_index(rng, syl.size())];
    return w;
  };
  TetCase c;
  std::set<std::string> seen;
  while (c.vocab.size() < words) {
    auto w = make_word(lrl_syllables);
    if (seen.insert(w).second) c.vocab.push_back(w);
  }
  std::vector<std::string> lrl_pieces = lrl_syllables;
  std::vector<std::string> hrl_pieces = hrl_syllables;
  for (const auto& s : lrl_syllables) lrl_pieces.push_back(s.substr(0, 1));
  for (const auto& s : hrl_syllables) hrl_pieces.push_back(s.substr(0, 1));
  // A few multi-syllable pieces so words segment unevenly.
  for (int i = 0; i < 4; ++i) lrl_pieces.push_back(lrl_syllables[uniform_index(rng, 8)] + lrl_syllables[uniform_index(rng, 8)]);
  for (int i = 0; i < 4; ++i) hrl_pieces.push_back(hrl_syllables[uniform_index(rng, 8)] + hrl_syllables[uniform_index(rng, 8)]);
  std::sort(lrl_pieces.begin(), lrl_pieces.end());
  lrl_pieces.erase(std::unique(lrl_pieces.begin(), lrl_pieces.end()), lrl_pieces.end());
  std::sort(hrl_pieces.begin(), hrl_pieces.end());
  hrl_pieces.erase(std::unique(hrl_pieces.begin(), hrl_pieces.end()), hrl_pieces.end());
  c.lrl_tok = corpus::Tokenizer::from_pieces(lrl_pieces);
  c.hrl_tok = corpus::Tokenizer::from_pieces(hrl_pieces);
  for (const auto& w : c.vocab)
    if (uniform01(rng) < 0.7) c.lex.add(w, make_word(hrl_syllables));
  c.hrl_emb = num::Tensor<double>({c.hrl_tok.size(), dim});
  std::normal_distribution<double> dist(0.0, 1.0);
  for (std::size_t i = 0; i < c.hrl_emb.size(); ++i) c.hrl_emb[i] = dist(rng);
  return c;
}

/// The two-word scenario with a shared piece: antarbhasika -> cross-lingual,
/// bahubhasika -> multi-lingual.
struct SharedPieceCase {
  std::vector<std::string> vocab{"antarbhasika", "bahubhasika"};
  corpus::Tokenizer lrl_tok = corpus::Tokenizer::from_pieces(std::vector<std::string>{"antar", "bahu", "bhasika"});
  corpus::Tokenizer hrl_tok = corpus::Tokenizer::from_pieces(std::vector<std::string>{"cross-", "multi-", "lingual"});
  lexicon::Lexicon lex;
  num::Tensor<double> hrl_emb;

  SharedPieceCase() {
    lex.add("antarbhasika", "cross-lingual");
    lex.add("bahubhasika", "multi-lingual");
    hrl_emb = num::Tensor<double>({hrl_tok.size(), 2});
    const auto set_row = [&](const char* piece, double a, double b) {
      const auto id = static_cast<std::size_t>(*hrl_tok.find(piece));
      hrl_emb[id * 2] = a;
      hrl_emb[id * 2 + 1] = b;
    };
    set_row("cross-", 1.0, 0.0);
    set_row("multi-", 0.0, 1.0);
    set_row("lingual", 3.0, 5.0);
  }
};

}  // namespace xlb::oracle

#endif  // XLB_TESTS_ORACLES_HPP
