// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_CORPUS_TOKENIZER_HPP
#define XLB_CORPUS_TOKENIZER_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xlb/corpus/instance.hpp"

namespace xlb::corpus {

using PieceId = std::int32_t;

/**
 * Subword inventory with greedy longest-match segmentation.
 *
 * Ids 0..2 are reserved for PAD, CLS and UNK. Pieces are sequences of UTF-8
 * code points; every character seen at build time is a piece, so a word over
 * the build alphabet never produces UNK.
 */
class Tokenizer {
 public:
  static constexpr PieceId kPad = 0;
  static constexpr PieceId kCls = 1;
  static constexpr PieceId kUnk = 2;
  static constexpr std::size_t kNumSpecials = 3;
  static constexpr std::string_view kPadText = "[PAD]";
  static constexpr std::string_view kClsText = "[CLS]";
  static constexpr std::string_view kUnkText = "[UNK]";

  /// Greedy frequency-based inventory: all characters, then the most frequent
  /// multi-character substrings (ties broken by first occurrence) until the
  /// inventory holds `target_size` entries or candidates run out.
  static Tokenizer build(std::span<const std::string> words, std::size_t target_size,
                         std::size_t max_piece_chars = 8);

  /// Inventory from explicit non-special pieces (ids assigned from 3 upward).
  static Tokenizer from_pieces(std::span<const std::string> pieces);

  static Tokenizer load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::vector<PieceId> encode_word(std::string_view word) const;

  std::size_t size() const { return pieces_.size(); }
  const std::string& piece(PieceId id) const { return pieces_.at(static_cast<std::size_t>(id)); }
  std::optional<PieceId> find(std::string_view piece) const;
  const std::vector<std::string>& pieces() const { return pieces_; }
  static bool is_special(PieceId id) { return id >= 0 && id < static_cast<PieceId>(kNumSpecials); }

  bool operator==(const Tokenizer& o) const { return pieces_ == o.pieces_; }

 private:
  void index();
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, PieceId> lookup_;
  std::size_t max_piece_chars_ = 1;
};

/// Instance after segmentation: CLS-prefixed ids with word spans and, for
/// labeling tasks, per-piece tags (-1 at CLS).
struct EncodedInstance {
  std::vector<PieceId> ids;
  std::vector<std::pair<std::size_t, std::size_t>> word_spans;  // [begin, end) positions
  std::vector<std::string> words;                                // surface forms kept in ids
  std::vector<int> piece_tags;
  int label = -1;
  Language language = Language::HRL;

  std::size_t length() const { return ids.size(); }
};

/// Encode one instance; trailing words that would exceed `max_len` positions are dropped.
EncodedInstance encode_instance(const Tokenizer& tok, const Instance& inst, std::size_t max_len);

std::vector<EncodedInstance> encode_all(const Tokenizer& tok, std::span<const Instance> insts,
                                        std::size_t max_len);

/// Replicate each word tag onto its pieces.
std::vector<int> expand_tags(std::span<const int> word_tags,
                             std::span<const std::pair<std::size_t, std::size_t>> spans,
                             std::size_t total_len);
/// Inverse of expand_tags: the tag at each word's first piece.
std::vector<int> collapse_tags(std::span<const int> piece_tags,
                               std::span<const std::pair<std::size_t, std::size_t>> spans);

}  // namespace xlb::corpus

#endif  // XLB_CORPUS_TOKENIZER_HPP
