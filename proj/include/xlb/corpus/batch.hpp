// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_CORPUS_BATCH_HPP
#define XLB_CORPUS_BATCH_HPP

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xlb/corpus/tokenizer.hpp"
#include "xlb/numerics/ops.hpp"

namespace xlb::corpus {

/// Encoded sentences padded to a common length, flattened row-major (B x S).
struct PaddedBatch {
  std::size_t batch = 0;
  std::size_t seq_len = 0;
  std::vector<PieceId> ids;        // B*S, PAD past each length
  std::vector<std::size_t> lengths;
  std::vector<Language> languages;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> word_spans;
  std::vector<std::vector<std::string>> words;
  /// Sentences only exchange cross-sentence edges within the same group.
  std::vector<int> groups;
  std::vector<int> labels;  // per sentence, -1 when absent
  std::vector<int> tags;    // per position, -1 at CLS/PAD or when absent

  std::size_t nodes() const { return batch * seq_len; }
  bool valid(std::size_t node) const { return node % seq_len < lengths[node / seq_len]; }
  num::SeqLayout layout() const { return {batch, seq_len, lengths}; }
};

/// Pads to the longest member. `groups` may be empty (everything in group 0).
PaddedBatch make_batch(std::span<const EncodedInstance* const> members, std::span<const int> groups = {});

}  // namespace xlb::corpus

#endif  // XLB_CORPUS_BATCH_HPP
