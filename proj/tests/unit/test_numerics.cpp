// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>

#include "xlb/common/error.hpp"
#include "xlb/common/rng.hpp"
#include "xlb/numerics/gradcheck.hpp"
#include "xlb/numerics/ops.hpp"

using namespace xlb;
using namespace xlb::num;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Tensor<double> random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  std::normal_distribution<double> dist(0.0, scale);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

}  // namespace

TEST_CASE("matmul oracles", "[numerics]") {
  Tape<double> tape(false);
  const Tensor<double> eye({2, 2}, {1, 0, 0, 1});
  const Tensor<double> m({2, 2}, {1, 2, 3, 4});
  const auto out = matmul(tape, eye, m);
  CHECK(std::vector<double>(out.values().begin(), out.values().end()) == std::vector<double>{1, 2, 3, 4});

  const auto dot = matmul(tape, Tensor<double>({1, 2}, {1, 2}), Tensor<double>({2, 1}, {3, 4}));
  CHECK(dot.shape() == Shape{1, 1});
  CHECK(dot.item() == 11.0);
}

TEST_CASE("matmul shape mismatch names both shapes", "[numerics]") {
  Tape<double> tape(false);
  try {
    matmul(tape, Tensor<double>({2, 3}), Tensor<double>({2, 3}));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string what = e.what();
    CHECK(what.find("2") != std::string::npos);
    CHECK(what.find("3") != std::string::npos);
  }
}

TEST_CASE("matmul gradient matches finite differences", "[numerics][gradcheck]") {
  Rng rng(11);
  auto a = random_tensor({3, 4}, rng);
  auto b = random_tensor({4, 2}, rng);
  const double err = finite_diff_check([&](Tape<double>& t) { return sum(t, matmul(t, a, b)); }, {a, b});
  CHECK(err <= 1e-6);
}

TEST_CASE("matmul result does not depend on the number of rows", "[numerics]") {
  Rng rng(3);
  const auto a = random_tensor({7, 5}, rng);
  const auto b = random_tensor({5, 3}, rng);
  Tape<double> tape(false);
  const auto full = matmul(tape, a, b);
  for (std::size_t r = 0; r < 7; ++r) {
    Tensor<double> row({1, 5});
    for (std::size_t k = 0; k < 5; ++k) row[k] = a[r * 5 + k];
    const auto one = matmul(tape, row, b);
    for (std::size_t c = 0; c < 3; ++c) CHECK(one[c] == full[r * 3 + c]);
  }
}

TEST_CASE("softmax oracles", "[numerics]") {
  Tape<double> tape(false);
  const auto uniform = softmax(tape, Tensor<double>({3}, {0, 0, 0}));
  for (std::size_t i = 0; i < 3; ++i) CHECK_THAT(uniform[i], WithinAbs(1.0 / 3.0, 1e-15));
  const auto big = softmax(tape, Tensor<double>({2}, {1000, 1000}));
  CHECK(big[0] == 0.5);
  CHECK(big[1] == 0.5);
  const auto closed = softmax(tape, Tensor<double>({2}, {0, std::log(3.0)}));
  CHECK_THAT(closed[0], WithinAbs(0.25, 1e-15));
  CHECK_THAT(closed[1], WithinAbs(0.75, 1e-15));
}

TEST_CASE("softmax rows sum to one", "[numerics][property]") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_tensor({4, 6}, rng, 10.0);
    Tape<double> tape(false);
    const auto p = softmax(tape, x);
    for (std::size_t r = 0; r < 4; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < 6; ++c) s += p[r * 6 + c];
      CHECK_THAT(s, WithinAbs(1.0, 1e-12));
    }
    Tape<float> ftape(false);
    const auto pf = softmax(ftape, cast<float>(x));
    for (std::size_t r = 0; r < 4; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < 6; ++c) s += pf[r * 6 + c];
      CHECK_THAT(s, WithinAbs(1.0, 1e-6));
    }
  }
}

TEST_CASE("layer_norm oracles", "[numerics]") {
  Tape<double> tape(false);
  const Tensor<double> gain({2}, {1, 1}), bias({2}, {0, 0});
  const auto flat = layer_norm(tape, Tensor<double>({1, 2}, {3, 3}), gain, bias, 1e-5);
  CHECK(flat[0] == 0.0);
  CHECK(flat[1] == 0.0);
  const auto unit = layer_norm(tape, Tensor<double>({1, 2}, {1, -1}), gain, bias, 1e-12);
  CHECK_THAT(unit[0], WithinAbs(1.0, 1e-9));
  CHECK_THAT(unit[1], WithinAbs(-1.0, 1e-9));

  Rng rng(2);
  const auto x = random_tensor({1, 16}, rng, 3.0);
  const Tensor<double> g16({16}, 1.0), b16({16}, 0.0);
  const auto y = layer_norm(tape, x, g16, b16, 1e-5);
  double m = 0.0;
  for (std::size_t i = 0; i < 16; ++i) m += y[i];
  CHECK_THAT(m / 16.0, WithinAbs(0.0, 1e-9));
}

TEST_CASE("backward oracles", "[numerics]") {
  Tensor<double> x({4}, {1, -2, 3, 0.5});
  x.set_requires_grad(true);
  {
    Tape<double> tape;
    tape.backward(sum(tape, x));
    for (std::size_t i = 0; i < 4; ++i) CHECK(x.grad()[i] == 1.0);
  }
  x.zero_grad();
  {
    Tape<double> tape;
    tape.backward(scale(tape, sum(tape, mul(tape, x, x)), 0.5));
    for (std::size_t i = 0; i < 4; ++i) CHECK(x.grad()[i] == x[i]);
  }
}

TEST_CASE("backward rejects a non-scalar loss", "[numerics]") {
  Tensor<double> x({3}, 1.0);
  x.set_requires_grad(true);
  Tape<double> tape;
  const auto y = scale(tape, x, 2.0);
  CHECK_THROWS_AS(tape.backward(y), ContractError);
}

TEST_CASE("finite_diff_check oracles", "[numerics][gradcheck]") {
  Rng rng(9);
  // Exact at x = 0: both perturbed sums are exactly +-h.
  Tensor<double> zeros({5}, 0.0);
  CHECK(finite_diff_check([&](Tape<double>& t) { return sum(t, zeros); }, zeros) == 0.0);
  auto x = random_tensor({5}, rng);
  CHECK(finite_diff_check([&](Tape<double>& t) { return sum(t, x); }, x) <= 1e-10);

  auto y = random_tensor({3}, rng);
  const std::vector<std::size_t> first{0};
  const double err = finite_diff_check(
      [&](Tape<double>& t) { return sum(t, gather_rows(t, softmax(t, y), std::span<const std::size_t>(first))); }, y);
  CHECK(err <= 1e-6);
}

TEST_CASE("op gradients match finite differences", "[numerics][gradcheck]") {
  Rng rng(21);
  auto x = random_tensor({3, 4}, rng);
  auto w = random_tensor({4, 4}, rng);
  auto bias = random_tensor({4}, rng);
  auto gain = random_tensor({4}, rng);
  const auto check = [&](const ScalarFn& f) { return finite_diff_check(f, {x, w, bias, gain}); };
  CHECK(check([&](Tape<double>& t) { return sum(t, mul(t, gelu(t, affine(t, x, w, bias)), x)); }) <= 1e-6);
  CHECK(check([&](Tape<double>& t) { return sum(t, mul(t, layer_norm(t, x, gain, bias, 1e-5), x)); }) <= 1e-6);
  CHECK(check([&](Tape<double>& t) { return sum(t, mul(t, softmax(t, x), x)); }) <= 1e-6);
  CHECK(check([&](Tape<double>& t) { return mean(t, mul(t, elu(t, x), x)); }) <= 1e-6);

  // Attention over two sequences of lengths 3 and 2 (S = 3).
  auto h = random_tensor({6, 4}, rng);
  const SeqLayout layout{2, 3, {3, 2}};
  const double att = finite_diff_check(
      [&](Tape<double>& t) {
        const auto q = matmul(t, h, w);
        const auto out = attention(t, q, h, h, layout, 2);
        return sum(t, mul(t, out, h));
      },
      {h, w});
  CHECK(att <= 1e-6);
}

TEST_CASE("spmm and gat_aggregate gradients", "[numerics][gradcheck]") {
  Rng rng(4);
  // 3-node path with self-loops.
  Csr adj;
  adj.rows = 3;
  adj.offsets = {0, 2, 5, 7};
  adj.cols = {0, 1, 0, 1, 2, 1, 2};
  adj.weights = {0.5, 0.4, 0.4, 0.3, 0.4, 0.4, 0.5};
  auto x = random_tensor({3, 4}, rng);
  CHECK(finite_diff_check([&](Tape<double>& t) { return sum(t, mul(t, spmm(t, adj, x), x)); }, x) <= 1e-6);

  auto z = random_tensor({3, 4}, rng);
  auto a_center = random_tensor({4}, rng);
  auto a_neighbor = random_tensor({4}, rng);
  const double err = finite_diff_check(
      [&](Tape<double>& t) {
        const auto center = matvec(t, z, a_center);
        const auto neighbor = matvec(t, z, a_neighbor);
        return sum(t, mul(t, gat_aggregate(t, z, center, neighbor, adj, 0.2), z));
      },
      {z, a_center, a_neighbor});
  CHECK(err <= 1e-4);
}

TEST_CASE("same seed gives bit-identical outputs", "[numerics][determinism]") {
  auto run = [] {
    Rng rng(77);
    const auto x = random_tensor({8, 8}, rng);
    Rng drop(5);
    Tape<double> tape(false);
    return dropout(tape, gelu(tape, matmul(tape, x, x)), 0.3, drop);
  };
  const auto a = run(), b = run();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
