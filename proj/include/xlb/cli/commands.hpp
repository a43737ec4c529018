// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_CLI_COMMANDS_HPP
#define XLB_CLI_COMMANDS_HPP

#include <exception>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "xlb/cli/experiment.hpp"

namespace xlb::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitPrerequisite = 2;
inline constexpr int kExitArtifact = 3;
inline constexpr int kExitNumeric = 4;

int exit_code_for(const std::exception& e);

// Output layout under ExperimentConfig::out_dir.
std::filesystem::path data_dir(const ExperimentConfig& cfg);
std::filesystem::path run_dir(const ExperimentConfig& cfg, const std::string& method, std::uint64_t seed);

/// Writes data/{hrl.jsonl, lrl.jsonl, lexicon.tsv, spec.json}. Existing files need `force`.
void cmd_generate(const ExperimentConfig& cfg, bool force, std::ostream& log);

/// The corpus a training command works on: the configured dataset paths, or the
/// generated files under data/ (PrerequisiteError when they are missing).
Corpus corpus_for_training(const ExperimentConfig& cfg);

/// Trains every (method, seed) of the config into runs/<method>/seed-N/.
/// Finished runs are kept unless `force`.
void cmd_train(const ExperimentConfig& cfg, bool force, std::size_t threads, std::ostream& log);

/// Re-scores saved checkpoints and writes eval.json next to each; a missing
/// checkpoint is an ArtifactError.
void cmd_eval(const ExperimentConfig& cfg, std::ostream& log);

const std::vector<std::string>& sweep_names();

struct SweepRow {
  std::string value;
  std::string method;
  std::uint64_t seed = 0;
  std::map<std::string, double> macro_f1;  // per split
};

/// Runs one ablation grid and writes ablations/<sweep>/{results.csv, table.md}.
/// `methods` empty means the sweep's default methods.
std::vector<SweepRow> cmd_ablate(const ExperimentConfig& cfg, const std::string& sweep,
                                 const std::vector<std::string>& methods, std::size_t threads, std::ostream& log);

/// Aggregates runs/*/seed-*/report.json into report/summary.{csv,md}.
void cmd_report(const ExperimentConfig& cfg, std::ostream& log);

/// Runs `jobs` on up to `threads` workers; the first exception (by job index) is rethrown.
void run_parallel(std::vector<std::function<void()>> jobs, std::size_t threads);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};
/// Sample standard deviation (0 for a single value).
MeanStd mean_std(const std::vector<double>& xs);

}  // namespace xlb::cli

#endif  // XLB_CLI_COMMANDS_HPP
