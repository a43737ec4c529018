// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_BATCHING_PLANNER_HPP
#define XLB_BATCHING_PLANNER_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "xlb/common/rng.hpp"
#include "xlb/corpus/tokenizer.hpp"
#include "xlb/lexicon/lexicon.hpp"

namespace xlb::batching {

using corpus::Language;

/// A training instance by language and index into that language's train split.
struct Member {
  Language language = Language::HRL;
  std::size_t index = 0;

  bool operator==(const Member&) const = default;
  auto operator<=>(const Member&) const = default;
};

struct AnchorGroup {
  Member anchor;
  std::vector<Member> neighbors;
};

enum class BatchKind { Strategic, Random };

struct BatchPlan {
  std::vector<Member> members;
  BatchKind kind = BatchKind::Random;
  std::vector<AnchorGroup> groups;  // strategic batches only

  std::size_t count(Language lang) const;
};

struct EpochPlan {
  std::vector<BatchPlan> batches;
  std::uint64_t seed = 0;
  double strategic_fraction = 0.7;
};

enum class OverlapMode { Set, Multiset };

/// Shared non-special token ids (set or multiset intersection size).
std::size_t token_overlap(std::span<const corpus::PieceId> a, std::span<const corpus::PieceId> b,
                          OverlapMode mode = OverlapMode::Set);

struct BatchingConfig {
  std::size_t batch_size = 64;
  std::size_t group_size = 10;
  double strategic_fraction = 0.7;
  /// Defaults to ceil(|HRL| / (B/2)).
  std::optional<std::size_t> batches_per_epoch;
  OverlapMode overlap = OverlapMode::Set;
  /// Score cross-language candidates against the LRL side's ids plus the
  /// pieces of its words' lexicon translations.
  bool translation_overlap = true;
  /// Inference neighborhood size (test instance included); defaults to batch_size.
  std::optional<std::size_t> eval_neighborhood;

  void validate() const;
};

/**
 * Overlap oracle over the two training pools. Token sets are computed once;
 * cross-language scores optionally count translated pieces (see
 * BatchingConfig::translation_overlap).
 */
class OverlapIndex {
 public:
  OverlapIndex(std::span<const corpus::EncodedInstance> hrl, std::span<const corpus::EncodedInstance> lrl,
               const corpus::Tokenizer& tok, const lexicon::Lexicon* lex, const BatchingConfig& cfg);

  /// Precomputed token sets of an arbitrary (e.g. test) instance used as anchor.
  struct Probe {
    Language language = Language::HRL;
    std::vector<corpus::PieceId> ids, bridged;
  };
  Probe probe(const corpus::EncodedInstance& anchor) const;
  std::size_t score(const Probe& anchor, const Member& m) const;
  std::size_t score(const corpus::EncodedInstance& anchor, const Member& m) const { return score(probe(anchor), m); }
  std::size_t score(const Member& anchor, const Member& m) const;
  std::size_t pool_size(Language lang) const;

 private:
  std::vector<corpus::PieceId> ids_of(const corpus::EncodedInstance& e) const;
  std::vector<corpus::PieceId> bridged_of(const corpus::EncodedInstance& e) const;
  std::size_t score_sets(Language anchor_lang, const std::vector<corpus::PieceId>& anchor_ids,
                         const std::vector<corpus::PieceId>& anchor_bridged, const Member& m) const;

  const corpus::Tokenizer* tok_;
  const lexicon::Lexicon* lex_;
  OverlapMode mode_;
  bool bridge_;
  std::vector<std::vector<corpus::PieceId>> hrl_ids_, lrl_ids_, lrl_bridged_;
};

/// Available training members of one language for the current epoch.
class Pool {
 public:
  Pool(Language lang, std::size_t total);
  Language language() const { return lang_; }
  std::size_t total() const { return total_; }
  const std::vector<std::size_t>& available() const { return available_; }
  void remove(std::size_t index);
  /// Makes every member not in `exclude` available again (recycling).
  void refill(const std::vector<Member>& exclude);

 private:
  Language lang_;
  std::size_t total_;
  std::vector<std::size_t> available_;  // ascending
};

/// Appends one batch of size B built from alternating anchor groups.
BatchPlan form_strategic_batch(Pool& lrl, Pool& hrl, const OverlapIndex& overlap, std::size_t batch_size,
                               std::size_t group_size, Rng& rng);

/// B/2 uniform draws from each pool.
BatchPlan form_random_batch(Pool& lrl, Pool& hrl, std::size_t batch_size, Rng& rng);

EpochPlan plan_epoch(const OverlapIndex& overlap, const BatchingConfig& cfg, std::uint64_t seed);

/// Test instance (as anchor, group 0 member 0) plus training neighbors by
/// overlap: up to size/2 - 1 same-language and size/2 other-language members;
/// ties fall back to a seeded random order.
struct Neighborhood {
  std::vector<Member> neighbors;
};
Neighborhood inference_neighborhood(const corpus::EncodedInstance& test, const OverlapIndex& overlap,
                                    std::size_t size, std::uint64_t seed);

/// `batch_index kind anchor_id [member ids...]` per anchor group / batch.
void dump_plan(const EpochPlan& plan, std::ostream& out);

}  // namespace xlb::batching

#endif  // XLB_BATCHING_PLANNER_HPP
