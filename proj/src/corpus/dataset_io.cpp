// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/corpus/dataset_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "xlb/common/error.hpp"

namespace xlb::corpus {

using json = nlohmann::json;

namespace {

constexpr std::string_view kSplitNames[] = {"train", "validation", "test"};

std::vector<Instance>& split_ref(Dataset& ds, std::string_view name, std::size_t line) {
  if (name == "train") return ds.train;
  if (name == "validation") return ds.validation;
  if (name == "test") return ds.test;
  throw SchemaError("unknown split '" + std::string(name) + "'", line);
}

int lookup_label(const std::unordered_map<std::string, int>& index, const std::string& name,
                 std::size_t line) {
  auto it = index.find(name);
  if (it == index.end()) throw SchemaError("unknown label '" + name + "'", line);
  return it->second;
}

}  // namespace

void write_dataset(const Dataset& ds, std::ostream& out) {
  json header = {{"task", std::string(to_string(ds.task))}, {"label_set", ds.label_set}};
  out << header.dump() << '\n';
  const std::vector<Instance>* splits[] = {&ds.train, &ds.validation, &ds.test};
  for (std::size_t s = 0; s < 3; ++s) {
    for (const auto& inst : *splits[s]) {
      json rec = {{"id", inst.id},
                  {"language", std::string(to_string(inst.language))},
                  {"split", std::string(kSplitNames[s])},
                  {"words", inst.words}};
      if (inst.sentence_label) rec["label"] = ds.label_set.at(static_cast<std::size_t>(*inst.sentence_label));
      if (inst.token_labels) {
        json tags = json::array();
        for (int t : *inst.token_labels) tags.push_back(ds.label_set.at(static_cast<std::size_t>(t)));
        rec["tags"] = std::move(tags);
      }
      out << rec.dump() << '\n';
    }
  }
}

Dataset read_dataset(std::istream& in, Task task) {
  Dataset ds;
  ds.task = task;
  std::unordered_map<std::string, int> label_index;
  bool have_header = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON record: ") + e.what(), lineno);
    }
    if (!rec.is_object()) throw ParseError("record is not a JSON object", lineno);

    try {
      if (!have_header) {
        if (!rec.contains("label_set")) throw SchemaError("first line must be the dataset header", lineno);
        if (rec.contains("task") && parse_task(rec.at("task").get<std::string>()) != task)
          throw SchemaError("file task '" + rec.at("task").get<std::string>() + "' does not match", lineno);
        ds.label_set = rec.at("label_set").get<std::vector<std::string>>();
        for (std::size_t i = 0; i < ds.label_set.size(); ++i) {
          if (!label_index.emplace(ds.label_set[i], static_cast<int>(i)).second)
            throw SchemaError("duplicate label '" + ds.label_set[i] + "'", lineno);
        }
        have_header = true;
        continue;
      }

      Instance inst;
      inst.id = rec.at("id").get<std::string>();
      inst.language = parse_language(rec.at("language").get<std::string>());
      inst.words = rec.at("words").get<std::vector<std::string>>();
      if (inst.words.empty()) throw SchemaError("record has no words", lineno);
      const std::string split = rec.value("split", "train");
      if (task == Task::SentenceClassification) {
        if (!rec.contains("label")) throw SchemaError("record is missing 'label'", lineno);
        inst.sentence_label = lookup_label(label_index, rec.at("label").get<std::string>(), lineno);
      } else {
        if (!rec.contains("tags")) throw SchemaError("record is missing 'tags'", lineno);
        const auto names = rec.at("tags").get<std::vector<std::string>>();
        if (names.size() != inst.words.size())
          throw SchemaError("record has " + std::to_string(inst.words.size()) + " words but " +
                                std::to_string(names.size()) + " tags",
                            lineno);
        std::vector<int> tags;
        tags.reserve(names.size());
        for (const auto& n : names) tags.push_back(lookup_label(label_index, n, lineno));
        inst.token_labels = std::move(tags);
      }
      split_ref(ds, split, lineno).push_back(std::move(inst));
    } catch (const ParseError&) {
      throw;
    } catch (const json::exception& e) {
      throw SchemaError(std::string("bad record field: ") + e.what(), lineno);
    } catch (const Error& e) {
      throw SchemaError(e.what(), lineno);
    }
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset file " + path.string());
  write_dataset(ds, out);
}

Dataset load_dataset(const std::filesystem::path& path, Task task) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file " + path.string());
  return read_dataset(in, task);
}

}  // namespace xlb::corpus
