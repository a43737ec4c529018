// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "xlb/common/error.hpp"
#include "xlb/corpus/batch.hpp"
#include "xlb/corpus/dataset_io.hpp"
#include "xlb/corpus/synthetic.hpp"
#include "xlb/corpus/tokenizer.hpp"
#include "xlb/training/metrics.hpp"

using namespace xlb;
using namespace xlb::corpus;

namespace {

std::set<std::string> inventory(const Tokenizer& tok) { return {tok.pieces().begin(), tok.pieces().end()}; }

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.hrl_vocab_size = 60;
  s.lrl_vocab_size = 60;
  s.hrl_sizes = {80, 20, 20};
  s.lrl_sizes = {30, 20, 20};
  return s;
}

std::string dataset_text(const Dataset& ds) {
  std::ostringstream out;
  write_dataset(ds, out);
  return out.str();
}

}  // namespace

TEST_CASE("tokenizer inventory oracles", "[corpus][tokenizer]") {
  const std::vector<std::string> ab{"ab"};
  const auto tok = Tokenizer::build(ab, 6);
  const auto inv = inventory(tok);
  for (const char* p : {"a", "b", "ab", "[PAD]", "[CLS]", "[UNK]"}) CHECK(inv.count(p) == 1);

  const std::vector<std::string> a{"a"};
  const auto tiny = Tokenizer::build(a, 4);
  CHECK(tiny.pieces() == std::vector<std::string>{"[PAD]", "[CLS]", "[UNK]", "a"});

  CHECK_THROWS_AS(Tokenizer::build(ab, 4), ConfigError);
}

TEST_CASE("tokenizer builds are deterministic", "[corpus][tokenizer][determinism]") {
  const std::vector<std::string> words{"antarbhasika", "bahubhasika", "bhasha", "antar", "cross", "lingual"};
  CHECK(Tokenizer::build(words, 30) == Tokenizer::build(words, 30));
}

TEST_CASE("greedy longest-match segmentation", "[corpus][tokenizer]") {
  const std::vector<std::string> pieces{"a", "b", "ab"};
  const auto tok = Tokenizer::from_pieces(pieces);
  const PieceId a = *tok.find("a"), b = *tok.find("b"), ab_id = *tok.find("ab");
  CHECK(tok.encode_word("ab") == std::vector<PieceId>{ab_id});
  CHECK(tok.encode_word("ba") == std::vector<PieceId>{b, a});
  CHECK(tok.encode_word("aζ") == std::vector<PieceId>{a, Tokenizer::kUnk});
}

TEST_CASE("words over the build alphabet never encode to UNK", "[corpus][tokenizer][property]") {
  const auto corpus = generate_synthetic(small_spec());
  std::vector<std::string> words;
  for (const auto* ds : {&corpus.hrl, &corpus.lrl})
    for (const auto& inst : ds->train) words.insert(words.end(), inst.words.begin(), inst.words.end());
  const auto tok = Tokenizer::build(words, 200);
  for (const auto& w : words) {
    const auto ids = tok.encode_word(w);
    CHECK(std::find(ids.begin(), ids.end(), Tokenizer::kUnk) == ids.end());
  }
}

TEST_CASE("tag expansion replicates and collapses back", "[corpus][property]") {
  const std::vector<std::string> pieces{"ka", "ma", "la", "x"};
  const auto tok = Tokenizer::from_pieces(pieces);
  Instance inst;
  inst.words = {"kamala", "x", "lama"};
  inst.token_labels = std::vector<int>{2, 0, 1};
  const auto enc = encode_instance(tok, inst, 32);
  REQUIRE(enc.ids.size() == 1 + 3 + 1 + 2);
  CHECK(enc.ids[0] == Tokenizer::kCls);
  CHECK(enc.piece_tags == std::vector<int>{-1, 2, 2, 2, 0, 1, 1});
  CHECK(collapse_tags(enc.piece_tags, enc.word_spans) == std::vector<int>{2, 0, 1});
  CHECK(expand_tags(std::vector<int>{2, 0, 1}, enc.word_spans, enc.length()) == enc.piece_tags);
}

TEST_CASE("synthetic corpus sizes and determinism", "[corpus][synthetic]") {
  const auto spec = small_spec();
  const auto a = generate_synthetic(spec), b = generate_synthetic(spec);
  CHECK(a.hrl.train.size() == 80);
  CHECK(a.lrl.test.size() == 20);
  CHECK(dataset_text(a.hrl) == dataset_text(b.hrl));
  CHECK(dataset_text(a.lrl) == dataset_text(b.lrl));
  CHECK(a.lexicon == b.lexicon);

  auto other = spec;
  other.seed = spec.seed + 1;
  CHECK(dataset_text(generate_synthetic(other).lrl) != dataset_text(a.lrl));
}

TEST_CASE("fully shared surface forms give an identity lexicon", "[corpus][synthetic]") {
  auto spec = small_spec();
  spec.shared_surface_fraction = 1.0;
  const auto corpus = generate_synthetic(spec);
  REQUIRE(!corpus.lexicon.empty());
  for (const auto& [lrl, entry] : corpus.lexicon.entries()) CHECK(entry.translation == lrl);
}

TEST_CASE("full signal strength is perfectly separable by the majority oracle", "[corpus][synthetic]") {
  auto spec = small_spec();
  spec.signal_strength = 1.0;
  const auto corpus = generate_synthetic(spec);
  std::vector<int> preds, golds;
  for (const auto& inst : corpus.hrl.train) {
    preds.push_back(majority_indicator(inst, corpus.hrl_word_class, spec.num_classes));
    golds.push_back(*inst.sentence_label);
  }
  CHECK(training::macro_f1(preds, golds, spec.num_classes).macro == 1.0);
}

TEST_CASE("majority-oracle accuracy grows with signal strength", "[corpus][synthetic][property]") {
  double previous = -1.0;
  for (double strength : {0.2, 0.5, 0.8, 1.0}) {
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      auto spec = small_spec();
      spec.signal_strength = strength;
      spec.hrl_sizes = {300, 10, 10};
      spec.seed = seed;
      const auto corpus = generate_synthetic(spec);
      std::vector<int> preds, golds;
      for (const auto& inst : corpus.hrl.train) {
        preds.push_back(majority_indicator(inst, corpus.hrl_word_class, spec.num_classes));
        golds.push_back(*inst.sentence_label);
      }
      total += training::macro_f1(preds, golds, spec.num_classes).macro;
    }
    CHECK(total / 4.0 >= previous - 0.02);
    previous = total / 4.0;
  }
}

TEST_CASE("invalid synthetic specs are rejected", "[corpus][synthetic]") {
  auto spec = small_spec();
  spec.lrl_vocab_size = spec.hrl_vocab_size + 1;
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
  spec = small_spec();
  spec.num_classes = 1;
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
}

TEST_CASE("dataset save/load round trip", "[corpus][io]") {
  for (const Task task : {Task::SentenceClassification, Task::SequenceLabeling}) {
    auto spec = small_spec();
    spec.task = task;
    const auto corpus = generate_synthetic(spec);
    std::stringstream buf;
    write_dataset(corpus.lrl, buf);
    CHECK(read_dataset(buf, task) == corpus.lrl);

    const auto path = std::filesystem::temp_directory_path() / "xlb_test_roundtrip.jsonl";
    save_dataset(corpus.hrl, path);
    CHECK(load_dataset(path, task) == corpus.hrl);
    std::filesystem::remove(path);
  }
}

TEST_CASE("header-only dataset file has empty splits", "[corpus][io]") {
  std::istringstream in(R"({"task":"sentence_classification","label_set":["neg","pos"]})"
                        "\n");
  const auto ds = read_dataset(in, Task::SentenceClassification);
  CHECK(ds.train.empty());
  CHECK(ds.validation.empty());
  CHECK(ds.test.empty());
  CHECK(ds.label_set == std::vector<std::string>{"neg", "pos"});
}

TEST_CASE("tag count mismatch is a schema error at its line", "[corpus][io]") {
  std::istringstream in(
      R"({"task":"sequence_labeling","label_set":["O","X"]})"
      "\n"
      R"({"id":"a","language":"LRL","split":"train","words":["p","q"],"tags":["O","X"]})"
      "\n"
      R"({"id":"b","language":"LRL","split":"train","words":["p","q","r"],"tags":["O","X"]})"
      "\n");
  try {
    read_dataset(in, Task::SequenceLabeling);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("unknown labels and malformed lines are rejected", "[corpus][io]") {
  std::istringstream unknown(
      R"({"task":"sentence_classification","label_set":["neg","pos"]})"
      "\n"
      R"({"id":"a","language":"HRL","split":"train","words":["p"],"label":"meh"})"
      "\n");
  CHECK_THROWS_AS(read_dataset(unknown, Task::SentenceClassification), SchemaError);
  std::istringstream broken(
      R"({"task":"sentence_classification","label_set":["neg","pos"]})"
      "\n{not json\n");
  try {
    read_dataset(broken, Task::SentenceClassification);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("padded batches", "[corpus][batch]") {
  const std::vector<std::string> pieces{"a", "b", "ab"};
  const auto tok = Tokenizer::from_pieces(pieces);
  Instance x{"x", Language::HRL, {"ab", "a"}, 1, std::nullopt};
  Instance y{"y", Language::LRL, {"b"}, 0, std::nullopt};
  const auto ex = encode_instance(tok, x, 16), ey = encode_instance(tok, y, 16);
  const std::vector<const EncodedInstance*> members{&ex, &ey};
  const auto batch = make_batch(members);
  CHECK(batch.batch == 2);
  CHECK(batch.seq_len == 3);
  CHECK(batch.lengths == std::vector<std::size_t>{3, 2});
  CHECK(batch.ids[5] == Tokenizer::kPad);
  CHECK(batch.labels == std::vector<int>{1, 0});
  CHECK(!batch.valid(5));
  CHECK(batch.valid(4));
}

TEST_CASE("encoding truncates to max_len", "[corpus]") {
  const std::vector<std::string> pieces{"a"};
  const auto tok = Tokenizer::from_pieces(pieces);
  Instance x{"x", Language::HRL, {"a", "a", "a", "a"}, 0, std::nullopt};
  const auto enc = encode_instance(tok, x, 3);
  CHECK(enc.length() == 3);
  CHECK(enc.word_spans.size() == 2);
}
