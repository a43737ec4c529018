// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_CORPUS_INSTANCE_HPP
#define XLB_CORPUS_INSTANCE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xlb::corpus {

enum class Language : std::uint8_t { HRL, LRL };
enum class Task : std::uint8_t { SentenceClassification, SequenceLabeling };

std::string_view to_string(Language lang);
std::string_view to_string(Task task);
Language parse_language(std::string_view s);
Task parse_task(std::string_view s);

/// One labeled text unit. Exactly one of sentence_label / token_labels is set.
struct Instance {
  std::string id;
  Language language = Language::HRL;
  std::vector<std::string> words;
  std::optional<int> sentence_label;
  std::optional<std::vector<int>> token_labels;  // one tag per word

  bool operator==(const Instance&) const = default;
};

struct Dataset {
  Task task = Task::SentenceClassification;
  std::vector<std::string> label_set;
  std::vector<Instance> train;
  std::vector<Instance> validation;
  std::vector<Instance> test;

  /// Throws SchemaError when an instance breaks the data-model invariants.
  void validate() const;
  std::size_t num_labels() const { return label_set.size(); }

  bool operator==(const Dataset&) const = default;
};

/// Split a UTF-8 string into code points (each returned as its byte sequence).
/// Invalid bytes are passed through one at a time.
std::vector<std::string> utf8_chars(std::string_view s);

}  // namespace xlb::corpus

#endif  // XLB_CORPUS_INSTANCE_HPP
