// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <sstream>

#include "support/oracles.hpp"
#include "xlb/common/error.hpp"
#include "xlb/lexicon/lexicon.hpp"
#include "xlb/lexicon/tet.hpp"

using namespace xlb;
using namespace xlb::lexicon;
using Catch::Matchers::WithinAbs;

namespace {

Lexicon parse(const std::string& text) {
  std::istringstream in(text);
  return Lexicon::read(in);
}

std::vector<double> row_of(const num::Tensor<double>& t, corpus::PieceId id) {
  const std::size_t d = t.dim(1);
  return {t.data() + static_cast<std::size_t>(id) * d, t.data() + (static_cast<std::size_t>(id) + 1) * d};
}

}  // namespace

TEST_CASE("lexicon file parsing", "[lexicon]") {
  const auto one = parse("antarbhasika\tcross-lingual\n");
  CHECK(one.size() == 1);
  CHECK(one.translate("antarbhasika") == "cross-lingual");
  CHECK(parse("").empty());
  CHECK(parse("# comment only\n\n").empty());
  CHECK(parse("bhasha\tlanguage, tongue\n").translate("bhasha") == "language");
}

TEST_CASE("duplicate lexicon keys are a conflict naming both lines", "[lexicon]") {
  try {
    parse("a\tx\nb\ty\na\tz\n");
    FAIL("expected ConflictError");
  } catch (const ConflictError& e) {
    const std::string what = e.what();
    CHECK(what.find("line 1") != std::string::npos);
    CHECK(what.find("line 3") != std::string::npos);
  }
}

TEST_CASE("malformed lexicon rows", "[lexicon]") {
  CHECK_THROWS_AS(parse("a\tb\tc\n"), ParseError);
  CHECK_THROWS_AS(parse("a\tb c\n"), ParseError);
  CHECK_THROWS_AS(parse("onlyone\n"), ParseError);
}

TEST_CASE("lexicon write/read round trip", "[lexicon]") {
  Lexicon lex;
  lex.add("antarbhasika", "cross-lingual");
  lex.add("bahubhasika", "multi-lingual");
  std::ostringstream out;
  lex.write(out);
  CHECK(parse(out.str()) == lex);
}

TEST_CASE("TET single-path mean", "[lexicon][tet]") {
  const auto lrl_tok = corpus::Tokenizer::from_pieces(std::vector<std::string>{"w"});
  const auto hrl_tok = corpus::Tokenizer::from_pieces(std::vector<std::string>{"v"});
  Lexicon lex;
  lex.add("w", "v");
  num::Tensor<double> emb({hrl_tok.size(), 3});
  for (std::size_t i = 0; i < emb.size(); ++i) emb[i] = 0.5 * static_cast<double>(i);
  const std::vector<std::string> vocab{"w"};
  const auto res = tet_initialize(vocab, lrl_tok, hrl_tok, emb, lex);
  const auto t = *lrl_tok.find("w");
  REQUIRE(res.rows.count(t) == 1);
  CHECK(res.rows.at(t) == row_of(emb, *hrl_tok.find("v")));
  CHECK(res.coverage == 1.0);
}

TEST_CASE("TET shared piece averages over the words containing it", "[lexicon][tet]") {
  const oracle::SharedPieceCase c;
  const auto res = tet_initialize(c.vocab, c.lrl_tok, c.hrl_tok, c.hrl_emb, c.lex);
  // e_avg(antarbhasika) = (2, 2.5), e_avg(bahubhasika) = (1.5, 3).
  const auto bhasika = res.rows.at(*c.lrl_tok.find("bhasika"));
  CHECK_THAT(bhasika[0], WithinAbs(1.75, 1e-15));
  CHECK_THAT(bhasika[1], WithinAbs(2.75, 1e-15));
  CHECK(res.rows.at(*c.lrl_tok.find("antar")) == std::vector<double>{2.0, 2.5});
  CHECK(res.rows.at(*c.lrl_tok.find("bahu")) == std::vector<double>{1.5, 3.0});
  CHECK(oracle::tet_max_diff(res, oracle::tet_brute_force(c.vocab, c.lrl_tok, c.hrl_tok, c.hrl_emb, c.lex)) <= 1e-12);
}

TEST_CASE("TET literal mode keeps the last containing word", "[lexicon][tet]") {
  const oracle::SharedPieceCase c;
  const auto res = tet_initialize(c.vocab, c.lrl_tok, c.hrl_tok, c.hrl_emb, c.lex, TetMode::Literal);
  CHECK(res.rows.at(*c.lrl_tok.find("bhasika")) == std::vector<double>{1.5, 3.0});
}

TEST_CASE("TET matches the brute-force oracle on random cases", "[lexicon][tet][property]") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto c = oracle::random_tet_case(seed);
    const auto res = tet_initialize(c.vocab, c.lrl_tok, c.hrl_tok, c.hrl_emb, c.lex);
    const auto want = oracle::tet_brute_force(c.vocab, c.lrl_tok, c.hrl_tok, c.hrl_emb, c.lex);
    INFO("seed " << seed);
    CHECK(oracle::tet_max_diff(res, want) <= 1e-12);
  }
}

TEST_CASE("TET skip pieces are neither covered nor uncovered", "[lexicon][tet]") {
  const oracle::SharedPieceCase c;
  const std::set<corpus::PieceId> skip{*c.lrl_tok.find("antar")};
  const auto res = tet_initialize(c.vocab, c.lrl_tok, c.hrl_tok, c.hrl_emb, c.lex, TetMode::Prose, skip);
  CHECK(res.rows.count(*c.lrl_tok.find("antar")) == 0);
  CHECK(res.covered.size() == 2);
  CHECK(oracle::tet_max_diff(res, oracle::tet_brute_force(c.vocab, c.lrl_tok, c.hrl_tok, c.hrl_emb, c.lex, skip)) <=
        1e-12);
}

TEST_CASE("TET is independent of vocabulary order", "[lexicon][tet][property]") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto c = oracle::random_tet_case(seed);
    const auto a = tet_initialize(c.vocab, c.lrl_tok, c.hrl_tok, c.hrl_emb, c.lex);
    Rng rng(seed);
    shuffle_in_place(c.vocab, rng);
    const auto b = tet_initialize(c.vocab, c.lrl_tok, c.hrl_tok, c.hrl_emb, c.lex);
    CHECK(a.rows == b.rows);
  }
}

TEST_CASE("TET rows lie in the hull of the HRL rows", "[lexicon][tet][property]") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto c = oracle::random_tet_case(seed);
    const auto res = tet_initialize(c.vocab, c.lrl_tok, c.hrl_tok, c.hrl_emb, c.lex);
    const std::size_t d = c.hrl_emb.dim(1);
    for (std::size_t col = 0; col < d; ++col) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t r = 0; r < c.hrl_emb.dim(0); ++r) {
        lo = std::min(lo, c.hrl_emb[r * d + col]);
        hi = std::max(hi, c.hrl_emb[r * d + col]);
      }
      for (const auto& [p, row] : res.rows) {
        CHECK(row[col] >= lo - 1e-12);
        CHECK(row[col] <= hi + 1e-12);
      }
    }
  }
}

TEST_CASE("TET coverage report", "[lexicon][tet]") {
  const oracle::SharedPieceCase c;
  const Lexicon empty;
  CHECK(tet_initialize(c.vocab, c.lrl_tok, c.hrl_tok, c.hrl_emb, empty).coverage == 0.0);
  CHECK(tet_initialize(c.vocab, c.lrl_tok, c.hrl_tok, c.hrl_emb, c.lex).coverage == 1.0);

  // Two words with disjoint pieces, one translatable.
  const auto lrl_tok = corpus::Tokenizer::from_pieces(std::vector<std::string>{"ka", "mo"});
  Lexicon half;
  half.add("ka", "cross-");
  const std::vector<std::string> vocab{"ka", "mo"};
  const auto res = tet_initialize(vocab, lrl_tok, c.hrl_tok, c.hrl_emb, half);
  CHECK(res.coverage == 0.5);
  CHECK(res.uncovered == std::vector<corpus::PieceId>{*lrl_tok.find("mo")});
}

TEST_CASE("apply_tet writes covered rows only", "[lexicon][tet]") {
  const oracle::SharedPieceCase c;
  const auto res = tet_initialize(c.vocab, c.lrl_tok, c.hrl_tok, c.hrl_emb, c.lex);
  num::Tensor<double> table({c.lrl_tok.size(), 2}, -9.0);
  apply_tet(res, table);
  CHECK(row_of(table, *c.lrl_tok.find("antar")) == std::vector<double>{2.0, 2.5});
  CHECK(row_of(table, corpus::Tokenizer::kCls) == std::vector<double>{-9.0, -9.0});
  num::Tensor<double> narrow({c.lrl_tok.size(), 3});
  CHECK_THROWS_AS(apply_tet(res, narrow), DimensionError);
}
