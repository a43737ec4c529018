// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/lexicon/tet.hpp"

#include <algorithm>

#include "xlb/common/error.hpp"

namespace xlb::lexicon {

using corpus::PieceId;

template <typename T>
TetResult tet_initialize(std::span<const std::string> lrl_vocab_words, const corpus::Tokenizer& lrl_tok,
                         const corpus::Tokenizer& hrl_tok, const num::Tensor<T>& hrl_embeddings,
                         const Lexicon& lex, TetMode mode, const std::set<PieceId>& skip_pieces) {
  if (hrl_embeddings.rank() != 2 || hrl_embeddings.dim(0) < hrl_tok.size())
    throw DimensionError("HRL embedding table " + num::shape_str(hrl_embeddings.shape()) +
                         " does not cover " + std::to_string(hrl_tok.size()) + " pieces");
  const std::size_t d = hrl_embeddings.dim(1);

  // Prose mode sums over words in sorted order so the result does not depend
  // on the order the vocabulary was listed in.
  std::vector<std::string> words(lrl_vocab_words.begin(), lrl_vocab_words.end());
  if (mode == TetMode::Prose) {
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
  }

  std::set<PieceId> considered;
  std::map<PieceId, std::vector<double>> sums;
  std::map<PieceId, std::size_t> counts;
  for (const auto& w : words) {
    const auto pieces = lrl_tok.encode_word(w);
    std::set<PieceId> distinct;
    for (PieceId p : pieces) {
      if (corpus::Tokenizer::is_special(p) || skip_pieces.count(p)) continue;
      distinct.insert(p);
      considered.insert(p);
    }
    const auto translation = lex.translate(w);
    if (!translation || distinct.empty()) continue;

    const auto hrl_pieces = hrl_tok.encode_word(*translation);
    std::vector<double> avg(d, 0.0);
    for (PieceId h : hrl_pieces) {
      const T* row = hrl_embeddings.data() + static_cast<std::size_t>(h) * d;
      for (std::size_t c = 0; c < d; ++c) avg[c] += static_cast<double>(row[c]);
    }
    for (auto& v : avg) v /= static_cast<double>(hrl_pieces.size());

    for (PieceId p : distinct) {
      if (mode == TetMode::Literal) {
        sums[p] = avg;
        counts[p] = 1;
      } else {
        auto& acc = sums[p];
        if (acc.empty()) acc.assign(d, 0.0);
        for (std::size_t c = 0; c < d; ++c) acc[c] += avg[c];
        ++counts[p];
      }
    }
  }

  TetResult result;
  for (PieceId p : considered) {
    auto it = sums.find(p);
    if (it == sums.end()) {
      result.uncovered.push_back(p);
      continue;
    }
    const double n = static_cast<double>(counts[p]);
    std::vector<double> row = std::move(it->second);
    for (auto& v : row) v /= n;
    result.rows.emplace(p, std::move(row));
    result.covered.push_back(p);
  }
  result.coverage = considered.empty()
                        ? 1.0
                        : static_cast<double>(result.covered.size()) / static_cast<double>(considered.size());
  return result;
}

template <typename T>
void apply_tet(const TetResult& result, num::Tensor<T>& table) {
  if (table.rank() != 2) throw DimensionError("embedding table must be 2-D");
  const std::size_t d = table.dim(1);
  for (const auto& [piece, row] : result.rows) {
    const auto idx = static_cast<std::size_t>(piece);
    if (idx >= table.dim(0)) throw IndexError("TET row " + std::to_string(piece) + " outside embedding table");
    if (row.size() != d) throw DimensionError("TET row width does not match embedding table");
    for (std::size_t c = 0; c < d; ++c) table[idx * d + c] = static_cast<T>(row[c]);
  }
}

template TetResult tet_initialize<float>(std::span<const std::string>, const corpus::Tokenizer&,
                                         const corpus::Tokenizer&, const num::Tensor<float>&,
                                         const Lexicon&, TetMode, const std::set<PieceId>&);
template TetResult tet_initialize<double>(std::span<const std::string>, const corpus::Tokenizer&,
                                          const corpus::Tokenizer&, const num::Tensor<double>&,
                                          const Lexicon&, TetMode, const std::set<PieceId>&);
template void apply_tet<float>(const TetResult&, num::Tensor<float>&);
template void apply_tet<double>(const TetResult&, num::Tensor<double>&);

}  // namespace xlb::lexicon
