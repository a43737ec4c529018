// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/corpus/batch.hpp"

#include <algorithm>

#include "xlb/common/error.hpp"

namespace xlb::corpus {

PaddedBatch make_batch(std::span<const EncodedInstance* const> members, std::span<const int> groups) {
  if (members.empty()) throw ContractError("cannot build an empty batch");
  if (!groups.empty() && groups.size() != members.size())
    throw DimensionError("one group id per batch member required");
  PaddedBatch b;
  b.batch = members.size();
  for (const auto* m : members) {
    if (m->ids.empty()) throw ContractError("encoded instance without tokens");
    b.seq_len = std::max(b.seq_len, m->length());
  }
  b.ids.assign(b.nodes(), Tokenizer::kPad);
  b.tags.assign(b.nodes(), -1);
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& m = *members[i];
    std::copy(m.ids.begin(), m.ids.end(), b.ids.begin() + static_cast<std::ptrdiff_t>(i * b.seq_len));
    if (!m.piece_tags.empty())
      std::copy(m.piece_tags.begin(), m.piece_tags.end(),
                b.tags.begin() + static_cast<std::ptrdiff_t>(i * b.seq_len));
    b.lengths.push_back(m.length());
    b.languages.push_back(m.language);
    b.word_spans.push_back(m.word_spans);
    b.words.push_back(m.words);
    b.labels.push_back(m.label);
    b.groups.push_back(groups.empty() ? 0 : groups[i]);
  }
  return b;
}

}  // namespace xlb::corpus
