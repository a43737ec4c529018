// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/corpus/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "xlb/common/error.hpp"

namespace xlb::corpus {

namespace {

struct Candidate {
  std::size_t count = 0;
  std::size_t first_seen = 0;
};

std::string join(const std::vector<std::string>& chars, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) out += chars[i];
  return out;
}

}  // namespace

Tokenizer Tokenizer::build(std::span<const std::string> words, std::size_t target_size,
                           std::size_t max_piece_chars) {
  if (words.empty()) throw ConfigError("cannot build a tokenizer from an empty corpus");
  if (max_piece_chars == 0) throw ConfigError("max_piece_chars must be positive");

  std::vector<std::string> single;
  std::unordered_map<std::string, std::size_t> single_seen;
  std::unordered_map<std::string, Candidate> multi;
  std::size_t order = 0;
  for (const auto& w : words) {
    const auto chars = utf8_chars(w);
    for (const auto& c : chars) {
      if (single_seen.emplace(c, single.size()).second) single.push_back(c);
    }
    for (std::size_t b = 0; b < chars.size(); ++b) {
      for (std::size_t len = 2; len <= max_piece_chars && b + len <= chars.size(); ++len) {
        auto [it, inserted] = multi.try_emplace(join(chars, b, b + len));
        if (inserted) it->second.first_seen = order++;
        ++it->second.count;
      }
    }
  }

  if (target_size < single.size() + kNumSpecials) {
    throw ConfigError("tokenizer target size " + std::to_string(target_size) + " is below " +
                      std::to_string(single.size()) + " characters + 3 specials");
  }

  std::vector<std::pair<std::string, Candidate>> ranked(multi.begin(), multi.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.second.first_seen < b.second.first_seen;
  });

  Tokenizer tok;
  tok.pieces_ = {std::string(kPadText), std::string(kClsText), std::string(kUnkText)};
  tok.pieces_.insert(tok.pieces_.end(), single.begin(), single.end());
  for (auto& [piece, cand] : ranked) {
    if (tok.pieces_.size() >= target_size) break;
    tok.pieces_.push_back(std::move(piece));
  }
  tok.index();
  return tok;
}

Tokenizer Tokenizer::from_pieces(std::span<const std::string> pieces) {
  Tokenizer tok;
  tok.pieces_ = {std::string(kPadText), std::string(kClsText), std::string(kUnkText)};
  tok.pieces_.insert(tok.pieces_.end(), pieces.begin(), pieces.end());
  tok.index();
  return tok;
}

void Tokenizer::index() {
  lookup_.clear();
  max_piece_chars_ = 1;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].empty()) throw ParseError("empty tokenizer piece", i + 1);
    if (!lookup_.emplace(pieces_[i], static_cast<PieceId>(i)).second)
      throw ConflictError("duplicate tokenizer piece '" + pieces_[i] + "'", i + 1);
    if (i >= kNumSpecials) max_piece_chars_ = std::max(max_piece_chars_, utf8_chars(pieces_[i]).size());
  }
}

Tokenizer Tokenizer::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open tokenizer file " + path.string());
  Tokenizer tok;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tok.pieces_.push_back(line);
  }
  const std::string_view expected[] = {kPadText, kClsText, kUnkText};
  for (std::size_t i = 0; i < kNumSpecials; ++i) {
    if (tok.pieces_.size() <= i || tok.pieces_[i] != expected[i])
      throw ParseError("tokenizer file must start with [PAD], [CLS], [UNK]", i + 1);
  }
  tok.index();
  return tok;
}

void Tokenizer::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write tokenizer file " + path.string());
  for (const auto& p : pieces_) out << p << '\n';
}

std::optional<PieceId> Tokenizer::find(std::string_view piece) const {
  auto it = lookup_.find(std::string(piece));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::vector<PieceId> Tokenizer::encode_word(std::string_view word) const {
  const auto chars = utf8_chars(word);
  std::vector<PieceId> out;
  std::size_t b = 0;
  while (b < chars.size()) {
    std::size_t len = std::min(max_piece_chars_, chars.size() - b);
    PieceId id = kUnk;
    for (; len > 0; --len) {
      auto it = lookup_.find(join(chars, b, b + len));
      if (it != lookup_.end() && !is_special(it->second)) {
        id = it->second;
        break;
      }
    }
    out.push_back(id);
    b += std::max<std::size_t>(len, 1);
  }
  return out;
}

EncodedInstance encode_instance(const Tokenizer& tok, const Instance& inst, std::size_t max_len) {
  if (max_len < 2) throw ConfigError("max_len must allow CLS plus one piece");
  EncodedInstance enc;
  enc.language = inst.language;
  enc.label = inst.sentence_label.value_or(-1);
  enc.ids.push_back(Tokenizer::kCls);
  std::vector<int> word_tags;
  for (std::size_t w = 0; w < inst.words.size(); ++w) {
    auto pieces = tok.encode_word(inst.words[w]);
    if (enc.ids.size() + pieces.size() > max_len) break;
    const std::size_t begin = enc.ids.size();
    enc.ids.insert(enc.ids.end(), pieces.begin(), pieces.end());
    enc.word_spans.emplace_back(begin, enc.ids.size());
    enc.words.push_back(inst.words[w]);
    if (inst.token_labels) word_tags.push_back((*inst.token_labels)[w]);
  }
  if (inst.token_labels) enc.piece_tags = expand_tags(word_tags, enc.word_spans, enc.ids.size());
  return enc;
}

std::vector<EncodedInstance> encode_all(const Tokenizer& tok, std::span<const Instance> insts,
                                        std::size_t max_len) {
  std::vector<EncodedInstance> out;
  out.reserve(insts.size());
  for (const auto& inst : insts) out.push_back(encode_instance(tok, inst, max_len));
  return out;
}

std::vector<int> expand_tags(std::span<const int> word_tags,
                             std::span<const std::pair<std::size_t, std::size_t>> spans,
                             std::size_t total_len) {
  if (word_tags.size() != spans.size())
    throw DimensionError("expand_tags: " + std::to_string(word_tags.size()) + " tags for " +
                         std::to_string(spans.size()) + " words");
  std::vector<int> out(total_len, -1);
  for (std::size_t w = 0; w < spans.size(); ++w) {
    if (spans[w].second > total_len) throw IndexError("expand_tags: span past sequence end");
    for (std::size_t p = spans[w].first; p < spans[w].second; ++p) out[p] = word_tags[w];
  }
  return out;
}

std::vector<int> collapse_tags(std::span<const int> piece_tags,
                               std::span<const std::pair<std::size_t, std::size_t>> spans) {
  std::vector<int> out;
  out.reserve(spans.size());
  for (const auto& [b, e] : spans) {
    if (b >= piece_tags.size()) throw IndexError("collapse_tags: span past sequence end");
    out.push_back(piece_tags[b]);
  }
  return out;
}

}  // namespace xlb::corpus
