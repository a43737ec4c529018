// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

// xlbridge: corpus generation, training, evaluation, ablations and gradient
// certification for cross-lingual transfer experiments.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xlb/cli/commands.hpp"
#include "xlb/cli/experiment.hpp"
#include "xlb/cli/gradcheck_suite.hpp"
#include "xlb/common/error.hpp"

namespace {

using xlb::ConfigError;
using xlb::cli::ExperimentConfig;

struct CommonFlags {
  std::string config;
  std::string out;
  std::vector<std::string> methods;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  bool force = false;
  std::size_t threads = 1;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_method) {
  cmd->add_option("--config", f.config, "Experiment config (JSON)");
  cmd->add_option("--out", f.out, "Output directory (overrides out_dir)");
  if (with_method) {
    cmd->add_option("--method", f.methods, "Method name; repeatable or comma separated")->delimiter(',');
    cmd->add_option("--seed", f.seed, "Single seed");
    cmd->add_option("--seeds", f.seeds, "Comma-separated seeds");
  }
  cmd->add_flag("--force", f.force, "Overwrite existing outputs");
  cmd->add_option("--threads", f.threads, "Worker threads for independent runs")->check(CLI::PositiveNumber);
  // Any other `--dotted.key=value` becomes a config override.
  cmd->allow_extras();
}

std::vector<std::string> dotted_overrides(const std::vector<std::string>& extras) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() == 2) throw ConfigError("unexpected argument '" + arg + "'");
    std::string body = arg.substr(2);
    if (body.find('=') == std::string::npos) {
      if (i + 1 >= extras.size()) throw ConfigError("option '" + arg + "' needs a value");
      body += "=" + extras[++i];
    }
    out.push_back(body);
  }
  return out;
}

bool file_sets_seeds(const std::string& path) {
  if (path.empty()) return false;
  std::ifstream in(path);
  if (!in) return false;  // load_experiment_config reports the error
  try {
    const auto j = nlohmann::json::parse(in);
    return j.is_object() && j.contains("seeds");
  } catch (const nlohmann::json::exception&) {
    return false;
  }
}

ExperimentConfig build_config(const CommonFlags& f, const std::vector<std::string>& extras) {
  std::vector<std::string> overrides = dotted_overrides(extras);
  bool seeds_given = file_sets_seeds(f.config);
  for (const auto& o : overrides)
    if (o.rfind("seeds=", 0) == 0) seeds_given = true;
  if (!f.out.empty()) overrides.push_back("out_dir=" + nlohmann::json(f.out).dump());
  if (!f.methods.empty()) overrides.push_back("methods=" + nlohmann::json(f.methods).dump());
  if (f.seed && !f.seeds.empty()) throw ConfigError("--seed and --seeds are mutually exclusive");
  if (f.seed) {
    overrides.push_back("seeds=[" + std::to_string(*f.seed) + "]");
  } else if (!f.seeds.empty()) {
    overrides.push_back("seeds=[" + f.seeds + "]");
  } else if (!seeds_given) {
    if (const char* env = std::getenv("BHASHA_SEED"); env && *env) {
      try {
        overrides.push_back("seeds=[" + std::to_string(std::stoull(env)) + "]");
      } catch (const std::exception&) {
        throw ConfigError(std::string("BHASHA_SEED is not an unsigned integer: ") + env);
      }
    }
  }
  std::optional<std::filesystem::path> file;
  if (!f.config.empty()) file = f.config;
  return xlb::cli::load_experiment_config(file, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xlbridge: cross-lingual transfer experiments on a from-scratch encoder"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* generate = app.add_subcommand("generate", "Write the synthetic bilingual corpus and lexicon");
  add_common(generate, flags, false);
  auto* train = app.add_subcommand("train", "Train methods x seeds; write checkpoints and reports");
  add_common(train, flags, true);
  auto* eval = app.add_subcommand("eval", "Re-score saved checkpoints");
  add_common(eval, flags, true);
  auto* ablate = app.add_subcommand("ablate", "Run one ablation grid");
  add_common(ablate, flags, true);
  std::string sweep;
  ablate->add_option("sweep", sweep, "alpha | hal_depth | gnn_depth | edge_retention | size_ratio | batch_size")
      ->required();
  auto* report = app.add_subcommand("report", "Summarize finished runs as CSV and markdown");
  add_common(report, flags, false);

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient certification (64-bit)");
  xlb::cli::GradcheckOptions gopts;
  gradcheck->add_option("--configs", gopts.configs_per_kind, "Random configurations per layer kind");
  gradcheck->add_option("--tolerance", gopts.tolerance, "Maximum relative error");
  gradcheck->add_option("--seed", gopts.seed, "Seed for the random configurations");
  gradcheck->add_flag("--corrupt-gat", gopts.corrupt_gat, "Break the GAT backward pass (negative control)")
      ->group("");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gradcheck->parsed()) {
      const auto results = xlb::cli::run_gradcheck_suite(gopts);
      xlb::cli::print_gradcheck(results, std::cout);
      for (const auto& r : results)
        if (!r.passed) return xlb::cli::kExitNumeric;
      return xlb::cli::kExitOk;
    }
    CLI::App* cmd = app.get_subcommands().front();
    const ExperimentConfig cfg = build_config(flags, cmd->remaining());
    if (cmd == generate) {
      xlb::cli::cmd_generate(cfg, flags.force, std::cout);
    } else if (cmd == train) {
      xlb::cli::cmd_train(cfg, flags.force, flags.threads, std::cout);
    } else if (cmd == eval) {
      xlb::cli::cmd_eval(cfg, std::cout);
    } else if (cmd == ablate) {
      xlb::cli::cmd_ablate(cfg, sweep, flags.methods, flags.threads, std::cout);
    } else if (cmd == report) {
      xlb::cli::cmd_report(cfg, std::cout);
    }
    return xlb::cli::kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "xlbridge: error: " << e.what() << '\n';
    return xlb::cli::exit_code_for(e);
  }
}
