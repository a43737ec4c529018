// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/batching/planner.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <ostream>

#include "xlb/common/error.hpp"

namespace xlb::batching {

using corpus::EncodedInstance;
using corpus::PieceId;
using corpus::Tokenizer;

namespace {

Language other_language(Language l) { return l == Language::HRL ? Language::LRL : Language::HRL; }

std::vector<PieceId> normalized(std::vector<PieceId> ids, OverlapMode mode) {
  ids.erase(std::remove_if(ids.begin(), ids.end(), [](PieceId p) { return Tokenizer::is_special(p); }), ids.end());
  std::sort(ids.begin(), ids.end());
  if (mode == OverlapMode::Set) ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::size_t intersect_sorted(const std::vector<PieceId>& a, const std::vector<PieceId>& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

std::string member_id(const Member& m) {
  return (m.language == Language::HRL ? "H" : "L") + std::to_string(m.index);
}

}  // namespace

std::size_t BatchPlan::count(Language lang) const {
  return static_cast<std::size_t>(
      std::count_if(members.begin(), members.end(), [lang](const Member& m) { return m.language == lang; }));
}

std::size_t token_overlap(std::span<const PieceId> a, std::span<const PieceId> b, OverlapMode mode) {
  return intersect_sorted(normalized({a.begin(), a.end()}, mode), normalized({b.begin(), b.end()}, mode));
}

void BatchingConfig::validate() const {
  if (batch_size < 2 || batch_size % 2 != 0) throw ConfigError("batch_size must be even and >= 2");
  if (group_size < 2 || group_size % 2 != 0) throw ConfigError("group_size must be even and >= 2");
  if (!(strategic_fraction >= 0.0 && strategic_fraction <= 1.0))
    throw ConfigError("strategic_fraction must be in [0, 1]");
  if (batches_per_epoch && *batches_per_epoch == 0) throw ConfigError("batches_per_epoch must be >= 1");
  if (eval_neighborhood && (*eval_neighborhood < 2 || *eval_neighborhood % 2 != 0))
    throw ConfigError("eval_neighborhood must be even and >= 2");
}

OverlapIndex::OverlapIndex(std::span<const EncodedInstance> hrl, std::span<const EncodedInstance> lrl,
                           const Tokenizer& tok, const lexicon::Lexicon* lex, const BatchingConfig& cfg)
    : tok_(&tok), lex_(lex), mode_(cfg.overlap), bridge_(cfg.translation_overlap && lex && !lex->empty()) {
  for (const auto& e : hrl) hrl_ids_.push_back(ids_of(e));
  for (const auto& e : lrl) {
    lrl_ids_.push_back(ids_of(e));
    lrl_bridged_.push_back(bridge_ ? bridged_of(e) : lrl_ids_.back());
  }
}

std::vector<PieceId> OverlapIndex::ids_of(const EncodedInstance& e) const { return normalized(e.ids, mode_); }

std::vector<PieceId> OverlapIndex::bridged_of(const EncodedInstance& e) const {
  std::vector<PieceId> ids = e.ids;
  for (const auto& w : e.words) {
    if (auto t = lex_->translate(w)) {
      const auto pieces = tok_->encode_word(*t);
      ids.insert(ids.end(), pieces.begin(), pieces.end());
    }
  }
  return normalized(std::move(ids), mode_);
}

std::size_t OverlapIndex::pool_size(Language lang) const {
  return lang == Language::HRL ? hrl_ids_.size() : lrl_ids_.size();
}

std::size_t OverlapIndex::score_sets(Language anchor_lang, const std::vector<PieceId>& anchor_ids,
                                     const std::vector<PieceId>& anchor_bridged, const Member& m) const {
  const auto& pool = m.language == Language::HRL ? hrl_ids_ : lrl_ids_;
  if (m.index >= pool.size()) throw IndexError("overlap query for a member outside its pool");
  if (m.language == anchor_lang || !bridge_) return intersect_sorted(anchor_ids, pool[m.index]);
  if (anchor_lang == Language::LRL) return intersect_sorted(anchor_bridged, pool[m.index]);
  return intersect_sorted(anchor_ids, lrl_bridged_[m.index]);
}

OverlapIndex::Probe OverlapIndex::probe(const EncodedInstance& anchor) const {
  Probe p{anchor.language, ids_of(anchor), {}};
  p.bridged = bridge_ && anchor.language == Language::LRL ? bridged_of(anchor) : p.ids;
  return p;
}

std::size_t OverlapIndex::score(const Probe& anchor, const Member& m) const {
  return score_sets(anchor.language, anchor.ids, anchor.bridged, m);
}

std::size_t OverlapIndex::score(const Member& anchor, const Member& m) const {
  const bool hrl = anchor.language == Language::HRL;
  const auto& ids = hrl ? hrl_ids_.at(anchor.index) : lrl_ids_.at(anchor.index);
  const auto& bridged = hrl ? ids : lrl_bridged_.at(anchor.index);
  return score_sets(anchor.language, ids, bridged, m);
}

Pool::Pool(Language lang, std::size_t total) : lang_(lang), total_(total), available_(total) {
  for (std::size_t i = 0; i < total; ++i) available_[i] = i;
}

void Pool::remove(std::size_t index) {
  auto it = std::lower_bound(available_.begin(), available_.end(), index);
  if (it == available_.end() || *it != index) throw PlanningError("member is not available in the pool");
  available_.erase(it);
}

void Pool::refill(const std::vector<Member>& exclude) {
  std::vector<std::uint8_t> blocked(total_, 0);
  for (const auto& m : exclude)
    if (m.language == lang_) blocked[m.index] = 1;
  available_.clear();
  for (std::size_t i = 0; i < total_; ++i)
    if (!blocked[i]) available_.push_back(i);
}

namespace {

void ensure(Pool& pool, std::size_t needed, const std::vector<Member>& batch) {
  if (pool.available().size() >= needed) return;
  pool.refill(batch);
  if (pool.available().size() < needed)
    throw PlanningError(std::string(corpus::to_string(pool.language())) + " pool of " +
                        std::to_string(pool.total()) + " instances cannot supply " + std::to_string(needed) +
                        " distinct members for one batch; lower batch_size (LRL instances recycle across batches, "
                        "never within one)");
}

/// Top-k available members by (overlap desc, index asc).
std::vector<Member> best_neighbors(const Pool& pool, std::size_t k, const Member& anchor, const OverlapIndex& ov) {
  std::vector<std::pair<std::size_t, std::size_t>> scored;  // (score, index)
  scored.reserve(pool.available().size());
  for (std::size_t idx : pool.available()) scored.emplace_back(ov.score(anchor, Member{pool.language(), idx}), idx);
  k = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
  std::vector<Member> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back({pool.language(), scored[i].second});
  return out;
}

}  // namespace

BatchPlan form_strategic_batch(Pool& lrl, Pool& hrl, const OverlapIndex& overlap, std::size_t batch_size,
                               std::size_t group_size, Rng& rng) {
  if (batch_size % 2 || group_size % 2 || group_size == 0) throw PlanningError("batch and group sizes must be even");
  BatchPlan plan;
  plan.kind = BatchKind::Strategic;
  Language anchor_lang = Language::LRL;
  while (plan.members.size() < batch_size) {
    const std::size_t r = std::min(group_size, batch_size - plan.members.size());
    const std::size_t same_n = r / 2 - 1, other_n = r / 2;
    Pool& same = anchor_lang == Language::LRL ? lrl : hrl;
    Pool& other = anchor_lang == Language::LRL ? hrl : lrl;
    ensure(same, 1 + same_n, plan.members);
    ensure(other, other_n, plan.members);

    AnchorGroup group;
    group.anchor = {anchor_lang, same.available()[uniform_index(rng, same.available().size())]};
    same.remove(group.anchor.index);
    for (const auto& m : best_neighbors(same, same_n, group.anchor, overlap)) {
      same.remove(m.index);
      group.neighbors.push_back(m);
    }
    for (const auto& m : best_neighbors(other, other_n, group.anchor, overlap)) {
      other.remove(m.index);
      group.neighbors.push_back(m);
    }
    plan.members.push_back(group.anchor);
    plan.members.insert(plan.members.end(), group.neighbors.begin(), group.neighbors.end());
    plan.groups.push_back(std::move(group));
    anchor_lang = other_language(anchor_lang);
  }
  return plan;
}

BatchPlan form_random_batch(Pool& lrl, Pool& hrl, std::size_t batch_size, Rng& rng) {
  if (batch_size % 2) throw PlanningError("batch size must be even");
  BatchPlan plan;
  plan.kind = BatchKind::Random;
  for (Pool* pool : {&lrl, &hrl}) {
    std::size_t need = batch_size / 2;
    // Leftovers go first, then the pool is recycled for the remainder.
    if (pool->available().size() < need) {
      const auto leftovers = pool->available();
      for (std::size_t idx : leftovers) {
        plan.members.push_back({pool->language(), idx});
        pool->remove(idx);
      }
      need -= leftovers.size();
      ensure(*pool, need, plan.members);
    }
    for (std::size_t i = 0; i < need; ++i) {
      const std::size_t idx = pool->available()[uniform_index(rng, pool->available().size())];
      pool->remove(idx);
      plan.members.push_back({pool->language(), idx});
    }
  }
  return plan;
}

EpochPlan plan_epoch(const OverlapIndex& overlap, const BatchingConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t half = cfg.batch_size / 2;
  for (Language l : {Language::LRL, Language::HRL}) {
    if (overlap.pool_size(l) < half)
      throw PlanningError(std::string(corpus::to_string(l)) + " pool of " + std::to_string(overlap.pool_size(l)) +
                          " instances is smaller than B/2 = " + std::to_string(half));
  }
  Rng rng(derive_seed(seed, "plan"));
  const std::size_t hrl_total = overlap.pool_size(Language::HRL);
  const std::size_t count = cfg.batches_per_epoch.value_or((hrl_total + half - 1) / half);
  const auto strategic = static_cast<std::size_t>(std::llround(cfg.strategic_fraction * static_cast<double>(count)));
  std::vector<BatchKind> kinds(count, BatchKind::Random);
  std::fill(kinds.begin(), kinds.begin() + static_cast<std::ptrdiff_t>(strategic), BatchKind::Strategic);
  shuffle_in_place(kinds, rng);

  EpochPlan plan;
  plan.seed = seed;
  plan.strategic_fraction = cfg.strategic_fraction;
  Pool lrl(Language::LRL, overlap.pool_size(Language::LRL));
  Pool hrl(Language::HRL, hrl_total);
  for (BatchKind kind : kinds) {
    plan.batches.push_back(kind == BatchKind::Strategic
                               ? form_strategic_batch(lrl, hrl, overlap, cfg.batch_size, cfg.group_size, rng)
                               : form_random_batch(lrl, hrl, cfg.batch_size, rng));
  }
  return plan;
}

Neighborhood inference_neighborhood(const EncodedInstance& test, const OverlapIndex& overlap, std::size_t size,
                                    std::uint64_t seed) {
  if (size < 2 || size % 2) throw ConfigError("neighborhood size must be even and >= 2");
  Rng rng(derive_seed(seed, "neighborhood"));
  Neighborhood out;
  const auto probe = overlap.probe(test);
  const Language same = test.language;
  for (Language lang : {same, other_language(same)}) {
    const std::size_t total = overlap.pool_size(lang);
    const std::size_t want = std::min(lang == same ? size / 2 - 1 : size / 2, total);
    std::vector<std::size_t> tiebreak(total);
    for (std::size_t i = 0; i < total; ++i) tiebreak[i] = i;
    shuffle_in_place(tiebreak, rng);
    std::vector<std::size_t> rank(total);
    for (std::size_t i = 0; i < total; ++i) rank[tiebreak[i]] = i;
    std::vector<std::pair<std::size_t, std::size_t>> scored;
    for (std::size_t i = 0; i < total; ++i) scored.emplace_back(overlap.score(probe, Member{lang, i}), i);
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(want), scored.end(),
                      [&](const auto& a, const auto& b) {
                        return a.first != b.first ? a.first > b.first : rank[a.second] < rank[b.second];
                      });
    for (std::size_t i = 0; i < want; ++i) out.neighbors.push_back({lang, scored[i].second});
  }
  return out;
}

void dump_plan(const EpochPlan& plan, std::ostream& out) {
  for (std::size_t b = 0; b < plan.batches.size(); ++b) {
    const auto& batch = plan.batches[b];
    if (batch.kind == BatchKind::Strategic) {
      for (const auto& g : batch.groups) {
        out << b << " strategic " << member_id(g.anchor);
        for (const auto& m : g.neighbors) out << ' ' << member_id(m);
        out << '\n';
      }
    } else {
      out << b << " random -";
      for (const auto& m : batch.members) out << ' ' << member_id(m);
      out << '\n';
    }
  }
}

}  // namespace xlb::batching
