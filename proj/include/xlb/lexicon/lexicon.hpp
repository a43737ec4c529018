// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_LEXICON_LEXICON_HPP
#define XLB_LEXICON_LEXICON_HPP

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace xlb::lexicon {

enum class Source { File, Synthetic };

/// LRL word -> single best HRL translation.
class Lexicon {
 public:
  struct Entry {
    std::string translation;
    Source source = Source::File;
    std::size_t line = 0;  // 1-based source line for file entries

    bool operator==(const Entry&) const = default;
  };

  /// Adds an entry; a key that is already present throws ConflictError.
  void add(std::string lrl_word, std::string hrl_word, Source source = Source::Synthetic,
           std::size_t line = 0);

  std::optional<std::string_view> translate(std::string_view lrl_word) const;
  bool contains(std::string_view lrl_word) const { return entries_.find(lrl_word) != entries_.end(); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, Entry, std::less<>>& entries() const { return entries_; }

  /// TSV `lrl<TAB>hrl`; `#` comments and blank lines are skipped. A second
  /// column listing alternatives separated by ',', ';' or '|' keeps the
  /// first one. Multi-word translations and extra columns are parse errors.
  static Lexicon read(std::istream& in);
  static Lexicon load(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  bool operator==(const Lexicon& o) const;

 private:
  std::map<std::string, Entry, std::less<>> entries_;
};

}  // namespace xlb::lexicon

#endif  // XLB_LEXICON_LEXICON_HPP
