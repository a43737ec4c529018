// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_CLI_GRADCHECK_SUITE_HPP
#define XLB_CLI_GRADCHECK_SUITE_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace xlb::cli {

struct GradcheckOptions {
  std::size_t configs_per_kind = 20;
  double tolerance = 1e-4;
  std::uint64_t seed = 2026;
  /// Negative control: cut the gradient through GAT edge scores.
  bool corrupt_gat = false;
};

struct KindResult {
  std::string kind;
  std::size_t configs = 0;
  double max_error = 0.0;
  bool passed = false;
};

/// Finite-difference certification in double precision of every layer kind:
/// embedding, transformer_layer, gcn, gat, getr_block, hal_mix, cross_entropy, kl_divergence.
std::vector<KindResult> run_gradcheck_suite(const GradcheckOptions& opts);

/// One `kind configs max_rel_error PASS|FAIL` line per kind.
void print_gradcheck(const std::vector<KindResult>& results, std::ostream& out);

}  // namespace xlb::cli

#endif  // XLB_CLI_GRADCHECK_SUITE_HPP
