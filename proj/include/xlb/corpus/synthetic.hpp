// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_CORPUS_SYNTHETIC_HPP
#define XLB_CORPUS_SYNTHETIC_HPP

#include <cstdint>
#include <string>
#include <unordered_map>

#include "xlb/corpus/instance.hpp"
#include "xlb/lexicon/lexicon.hpp"

namespace xlb::corpus {

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

/**
 * Parameters of the bilingual toy corpus.
 *
 * Each language has neutral function words and, per class, indicator
 * (content) words. HRL words are built from Latin syllables and LRL words
 * from Greek ones, so the two languages share no characters except through
 * words whose surface form is reused (shared_surface_fraction). Word
 * frequencies follow a Zipf law; an LRL word and its translation have the
 * same frequency rank.
 */
struct SyntheticSpec {
  Task task = Task::SentenceClassification;
  std::size_t num_classes = 2;
  std::size_t hrl_vocab_size = 240;
  std::size_t lrl_vocab_size = 240;
  double function_word_fraction = 0.1;
  double shared_surface_fraction = 0.1;
  std::size_t min_len = 4;
  std::size_t max_len = 10;
  double signal_strength = 0.8;
  double function_word_rate = 0.3;
  double zipf_exponent = 0.6;
  SplitSizes hrl_sizes{2000, 200, 200};
  SplitSizes lrl_sizes{100, 100, 300};
  std::uint64_t seed = 7;

  /// Throws ConfigError for out-of-range or infeasible values.
  void validate() const;
};

struct SyntheticCorpus {
  Dataset hrl;
  Dataset lrl;
  lexicon::Lexicon lexicon;
  /// Word -> class index (-1 for function words); ground truth for oracles.
  std::unordered_map<std::string, int> hrl_word_class;
  std::unordered_map<std::string, int> lrl_word_class;
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

/// Majority-indicator decision given the true word classes (ties -> lowest class).
int majority_indicator(const Instance& inst, const std::unordered_map<std::string, int>& word_class,
                       std::size_t num_classes);

}  // namespace xlb::corpus

#endif  // XLB_CORPUS_SYNTHETIC_HPP
