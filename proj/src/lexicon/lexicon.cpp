// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/lexicon/lexicon.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "xlb/common/error.hpp"

namespace xlb::lexicon {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return cols;
}

}  // namespace

void Lexicon::add(std::string lrl_word, std::string hrl_word, Source source, std::size_t line) {
  if (lrl_word.empty() || hrl_word.empty()) throw ParseError("empty lexicon word", line);
  auto it = entries_.find(lrl_word);
  if (it != entries_.end()) {
    std::string msg = "duplicate lexicon key '" + lrl_word + "'";
    if (it->second.line) msg += " first defined on line " + std::to_string(it->second.line);
    if (line) msg += ", repeated on line " + std::to_string(line);
    throw ConflictError(msg, 0);
  }
  entries_.emplace(std::move(lrl_word), Entry{std::move(hrl_word), source, line});
}

std::optional<std::string_view> Lexicon::translate(std::string_view lrl_word) const {
  auto it = entries_.find(lrl_word);
  if (it == entries_.end()) return std::nullopt;
  return std::string_view(it->second.translation);
}

Lexicon Lexicon::read(std::istream& in) {
  Lexicon lex;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 2)
      throw ParseError("expected 2 tab-separated columns, found " + std::to_string(cols.size()), lineno);
    const auto key = trim(cols[0]);
    auto value = trim(cols[1]);
    const auto alt = value.find_first_of(",;|");
    if (alt != std::string_view::npos) value = trim(value.substr(0, alt));
    if (key.empty() || value.empty()) throw ParseError("empty lexicon column", lineno);
    if (key.find_first_of(" \t") != std::string_view::npos ||
        value.find_first_of(" \t") != std::string_view::npos)
      throw ParseError("lexicon entries must be single words", lineno);
    lex.add(std::string(key), std::string(value), Source::File, lineno);
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon file " + path.string());
  return read(in);
}

void Lexicon::write(std::ostream& out) const {
  for (const auto& [key, entry] : entries_) out << key << '\t' << entry.translation << '\n';
}

void Lexicon::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write lexicon file " + path.string());
  write(out);
}

bool Lexicon::operator==(const Lexicon& o) const {
  if (entries_.size() != o.entries_.size()) return false;
  auto a = entries_.begin();
  auto b = o.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    if (a->first != b->first || a->second.translation != b->second.translation) return false;
  }
  return true;
}

}  // namespace xlb::lexicon
