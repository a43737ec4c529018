// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/corpus/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "xlb/common/error.hpp"
#include "xlb/common/rng.hpp"

namespace xlb::corpus {

namespace {

const std::vector<std::string> kLatinOnsets = {"b", "d", "f", "g", "k", "l", "m", "n", "p",
                                               "r", "s", "t", "v", "z", "h", "j", "w"};
const std::vector<std::string> kLatinNuclei = {"a", "e", "i", "o", "u"};
const std::vector<std::string> kGreekOnsets = {"β", "γ", "δ", "ζ", "θ", "κ", "λ", "μ", "ν",
                                               "ξ", "π", "ρ", "σ", "τ", "φ", "χ", "ψ"};
const std::vector<std::string> kGreekNuclei = {"α", "ε", "η", "ι", "ο", "υ", "ω"};

/// Word roles shared by both languages: function words, then content words per class.
struct Layout {
  std::size_t function_words = 0;
  std::size_t per_class = 0;
};

Layout layout_for(std::size_t vocab, double function_fraction, std::size_t classes) {
  Layout l;
  l.function_words = static_cast<std::size_t>(std::lround(function_fraction * static_cast<double>(vocab)));
  l.per_class = (vocab - l.function_words) / classes;
  return l;
}

std::vector<std::string> make_surfaces(std::size_t count, const std::vector<std::string>& onsets,
                                       const std::vector<std::string>& nuclei, Rng& rng) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  out.reserve(count);
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > count * 1000) throw ConfigError("cannot draw enough distinct synthetic words");
    const std::size_t syllables = 2 + uniform_index(rng, 2);
    std::string w;
    for (std::size_t s = 0; s < syllables; ++s)
      w += onsets[uniform_index(rng, onsets.size())] + nuclei[uniform_index(rng, nuclei.size())];
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

/// Cumulative Zipf weights over ranks 0..n-1.
std::vector<double> zipf_cdf(std::size_t n, double exponent) {
  std::vector<double> cdf(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
    cdf[i] = acc;
  }
  for (auto& c : cdf) c /= acc;
  return cdf;
}

std::size_t draw(const std::vector<double>& cdf, Rng& rng) {
  const double u = uniform01(rng);
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

struct Lang {
  std::vector<std::string> function_words;
  std::vector<std::vector<std::string>> content;  // [class][rank]
};

std::vector<Instance> make_split(const Lang& lang, const SyntheticSpec& spec, Language tag,
                                 std::string_view split, std::size_t count) {
  const std::string prefix = std::string(to_string(tag)) + "/" + std::string(split);
  Rng rng(derive_seed(spec.seed, prefix));
  const auto fn_cdf = zipf_cdf(lang.function_words.size(), spec.zipf_exponent);
  const auto ct_cdf = zipf_cdf(lang.content.front().size(), spec.zipf_exponent);
  const std::size_t k = spec.num_classes;

  std::vector<Instance> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Instance inst;
    inst.id = (tag == Language::HRL ? "hrl-" : "lrl-") + std::string(split) + "-" + std::to_string(i);
    inst.language = tag;
    const int label = static_cast<int>(uniform_index(rng, k));
    const std::size_t len = spec.min_len + uniform_index(rng, spec.max_len - spec.min_len + 1);
    std::vector<int> tags;
    bool has_content = false;
    for (std::size_t p = 0; p < len; ++p) {
      const bool last_chance = p + 1 == len && !has_content;
      if (!last_chance && uniform01(rng) < spec.function_word_rate) {
        inst.words.push_back(lang.function_words[draw(fn_cdf, rng)]);
        tags.push_back(0);
        continue;
      }
      int cls = label;
      if (k > 1 && uniform01(rng) >= spec.signal_strength) {
        cls = static_cast<int>(uniform_index(rng, k - 1));
        if (cls >= label) ++cls;
      }
      inst.words.push_back(lang.content[static_cast<std::size_t>(cls)][draw(ct_cdf, rng)]);
      tags.push_back(cls + 1);
      has_content = true;
    }
    if (spec.task == Task::SentenceClassification) inst.sentence_label = label;
    else inst.token_labels = std::move(tags);
    out.push_back(std::move(inst));
  }
  return out;
}

Dataset make_dataset(const Lang& lang, const SyntheticSpec& spec, Language tag, const SplitSizes& sizes) {
  Dataset ds;
  ds.task = spec.task;
  if (spec.task == Task::SequenceLabeling) ds.label_set.push_back("O");
  for (std::size_t c = 0; c < spec.num_classes; ++c) ds.label_set.push_back("C" + std::to_string(c));
  ds.train = make_split(lang, spec, tag, "train", sizes.train);
  ds.validation = make_split(lang, spec, tag, "validation", sizes.validation);
  ds.test = make_split(lang, spec, tag, "test", sizes.test);
  return ds;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (num_classes < 2) throw ConfigError("synthetic corpus needs at least 2 classes");
  if (hrl_vocab_size < 1 || lrl_vocab_size < 1) throw ConfigError("vocabulary sizes must be >= 1");
  if (lrl_vocab_size > hrl_vocab_size)
    throw ConfigError("lrl_vocab_size must not exceed hrl_vocab_size (every LRL word needs a translation)");
  if (function_word_fraction < 0.0 || function_word_fraction >= 1.0)
    throw ConfigError("function_word_fraction must be in [0, 1)");
  if (shared_surface_fraction < 0.0 || shared_surface_fraction > 1.0)
    throw ConfigError("shared_surface_fraction must be in [0, 1]");
  if (min_len < 2 || max_len < min_len) throw ConfigError("need 2 <= min_len <= max_len");
  if (!(signal_strength > 0.0 && signal_strength <= 1.0)) throw ConfigError("signal_strength must be in (0, 1]");
  if (function_word_rate < 0.0 || function_word_rate >= 1.0) throw ConfigError("function_word_rate must be in [0, 1)");
  if (zipf_exponent < 0.0) throw ConfigError("zipf_exponent must be >= 0");
  for (const auto* s : {&hrl_sizes, &lrl_sizes}) {
    if (s->train < 1 || s->validation < 1 || s->test < 1) throw ConfigError("split sizes must be >= 1");
  }
  const auto h = layout_for(hrl_vocab_size, function_word_fraction, num_classes);
  const auto l = layout_for(lrl_vocab_size, function_word_fraction, num_classes);
  if (l.function_words < 1 || l.per_class < 1)
    throw ConfigError("lrl_vocab_size too small for one function word and one content word per class");
  if (l.function_words > h.function_words || l.per_class > h.per_class)
    throw ConfigError("HRL vocabulary cannot cover every LRL word role");
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const auto hl = layout_for(spec.hrl_vocab_size, spec.function_word_fraction, spec.num_classes);
  const auto ll = layout_for(spec.lrl_vocab_size, spec.function_word_fraction, spec.num_classes);

  Rng word_rng(derive_seed(spec.seed, "words"));
  const std::size_t hrl_total = hl.function_words + hl.per_class * spec.num_classes;
  const std::size_t lrl_total = ll.function_words + ll.per_class * spec.num_classes;
  auto hrl_surfaces = make_surfaces(hrl_total, kLatinOnsets, kLatinNuclei, word_rng);
  auto lrl_surfaces = make_surfaces(lrl_total, kGreekOnsets, kGreekNuclei, word_rng);

  SyntheticCorpus out;
  Lang hrl, lrl;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < hl.function_words; ++i) {
    hrl.function_words.push_back(hrl_surfaces[cursor++]);
    out.hrl_word_class[hrl.function_words.back()] = -1;
  }
  hrl.content.resize(spec.num_classes);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t i = 0; i < hl.per_class; ++i) {
      hrl.content[c].push_back(hrl_surfaces[cursor++]);
      out.hrl_word_class[hrl.content[c].back()] = static_cast<int>(c);
    }
  }

  // LRL role r translates to the HRL word with the same role and rank.
  std::vector<std::pair<std::string*, const std::string*>> pairs;
  lrl.function_words.assign(lrl_surfaces.begin(), lrl_surfaces.begin() + static_cast<std::ptrdiff_t>(ll.function_words));
  cursor = ll.function_words;
  lrl.content.resize(spec.num_classes);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t i = 0; i < ll.per_class; ++i) lrl.content[c].push_back(lrl_surfaces[cursor++]);
  }
  for (std::size_t i = 0; i < ll.function_words; ++i) pairs.emplace_back(&lrl.function_words[i], &hrl.function_words[i]);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t i = 0; i < ll.per_class; ++i) pairs.emplace_back(&lrl.content[c][i], &hrl.content[c][i]);
  }

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng share_rng(derive_seed(spec.seed, "shared-surface"));
  shuffle_in_place(order, share_rng);
  const auto shared = static_cast<std::size_t>(
      std::lround(spec.shared_surface_fraction * static_cast<double>(pairs.size())));
  for (std::size_t i = 0; i < shared; ++i) *pairs[order[i]].first = *pairs[order[i]].second;

  for (std::size_t i = 0; i < ll.function_words; ++i) out.lrl_word_class[lrl.function_words[i]] = -1;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (const auto& w : lrl.content[c]) out.lrl_word_class[w] = static_cast<int>(c);
  }
  for (const auto& [l, h] : pairs) out.lexicon.add(*l, *h, lexicon::Source::Synthetic);

  out.hrl = make_dataset(hrl, spec, Language::HRL, spec.hrl_sizes);
  out.lrl = make_dataset(lrl, spec, Language::LRL, spec.lrl_sizes);
  return out;
}

int majority_indicator(const Instance& inst, const std::unordered_map<std::string, int>& word_class,
                       std::size_t num_classes) {
  std::vector<int> votes(num_classes, 0);
  for (const auto& w : inst.words) {
    auto it = word_class.find(w);
    if (it != word_class.end() && it->second >= 0) ++votes[static_cast<std::size_t>(it->second)];
  }
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

}  // namespace xlb::corpus
