// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/corpus/instance.hpp"

#include "xlb/common/error.hpp"

namespace xlb::corpus {

std::string_view to_string(Language lang) { return lang == Language::HRL ? "HRL" : "LRL"; }

std::string_view to_string(Task task) {
  return task == Task::SentenceClassification ? "sentence_classification" : "sequence_labeling";
}

Language parse_language(std::string_view s) {
  if (s == "HRL" || s == "hrl") return Language::HRL;
  if (s == "LRL" || s == "lrl") return Language::LRL;
  throw SchemaError("unknown language tag '" + std::string(s) + "'");
}

Task parse_task(std::string_view s) {
  if (s == "sentence_classification" || s == "sentence") return Task::SentenceClassification;
  if (s == "sequence_labeling" || s == "labeling") return Task::SequenceLabeling;
  throw ConfigError("unknown task '" + std::string(s) + "'");
}

void Dataset::validate() const {
  const int n = static_cast<int>(label_set.size());
  for (const auto* split : {&train, &validation, &test}) {
    for (const auto& inst : *split) {
      if (inst.words.empty()) throw SchemaError("instance " + inst.id + " has no words");
      if (task == Task::SentenceClassification) {
        if (!inst.sentence_label || inst.token_labels)
          throw SchemaError("instance " + inst.id + " needs exactly a sentence label");
        if (*inst.sentence_label < 0 || *inst.sentence_label >= n)
          throw SchemaError("instance " + inst.id + " has label index out of range");
      } else {
        if (!inst.token_labels || inst.sentence_label)
          throw SchemaError("instance " + inst.id + " needs exactly per-word tags");
        if (inst.token_labels->size() != inst.words.size())
          throw SchemaError("instance " + inst.id + " has " + std::to_string(inst.words.size()) +
                            " words but " + std::to_string(inst.token_labels->size()) + " tags");
        for (int t : *inst.token_labels)
          if (t < 0 || t >= n) throw SchemaError("instance " + inst.id + " has tag out of range");
      }
    }
  }
}

std::vector<std::string> utf8_chars(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (c >= 0xF0 && c < 0xF8) len = 4;
    else if (c >= 0xE0) len = c < 0xF0 ? 3 : 1;
    else if (c >= 0xC0) len = 2;
    if (i + len > s.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace xlb::corpus
