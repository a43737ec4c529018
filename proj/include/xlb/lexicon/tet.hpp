// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_LEXICON_TET_HPP
#define XLB_LEXICON_TET_HPP

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "xlb/corpus/tokenizer.hpp"
#include "xlb/lexicon/lexicon.hpp"
#include "xlb/numerics/tensor.hpp"

namespace xlb::lexicon {

enum class TetMode {
  /// Each piece gets the mean, over the distinct translatable vocabulary words
  /// containing it, of that word's mean translated-piece embedding.
  Prose,
  /// Line-by-line reading of the printed pseudocode: the projection set is
  /// reset per piece and filled with copies of the current word's mean, so the
  /// last translatable word (in vocabulary order) containing the piece wins.
  Literal,
};

struct TetResult {
  std::map<corpus::PieceId, std::vector<double>> rows;
  std::vector<corpus::PieceId> covered;
  std::vector<corpus::PieceId> uncovered;
  /// covered / (covered + uncovered); 1.0 when no piece was considered.
  double coverage = 0.0;
};

/**
 * Translation-based initialization of LRL piece embeddings.
 *
 * Considered pieces are the non-special pieces of the LRL vocabulary words,
 * minus `skip_pieces` (pieces that already own a trained row, e.g. because
 * the vocabulary is shared with the HRL). `hrl_embeddings` is a
 * [hrl_tok.size() x d] table.
 */
template <typename T>
TetResult tet_initialize(std::span<const std::string> lrl_vocab_words, const corpus::Tokenizer& lrl_tok,
                         const corpus::Tokenizer& hrl_tok, const num::Tensor<T>& hrl_embeddings,
                         const Lexicon& lex, TetMode mode = TetMode::Prose,
                         const std::set<corpus::PieceId>& skip_pieces = {});

/// Copy TET rows into an embedding table in place.
template <typename T>
void apply_tet(const TetResult& result, num::Tensor<T>& table);

}  // namespace xlb::lexicon

#endif  // XLB_LEXICON_TET_HPP
