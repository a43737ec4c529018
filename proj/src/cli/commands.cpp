// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "xlb/common/error.hpp"
#include "xlb/corpus/dataset_io.hpp"
#include "xlb/model/checkpoint.hpp"
#include "xlb/model/encoder.hpp"

namespace xlb::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* const kSplits[] = {"lrl_test", "lrl_validation", "hrl_test"};

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

std::string mean_std_cell(const std::vector<double>& xs) {
  if (xs.empty()) return "-";
  const MeanStd s = mean_std(xs);
  return fmt("%.3f", s.mean) + " ± " + fmt("%.3f", s.std);
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw ArtifactError("cannot write " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("missing artifact " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ArtifactError(path.string() + " is not valid JSON: " + e.what());
  }
}

/// Serializes writes to a shared log stream from worker threads.
class Log {
 public:
  explicit Log(std::ostream& out) : out_(out) {}
  void line(const std::string& s) {
    std::lock_guard lock(mu_);
    out_ << s << '\n' << std::flush;
  }

 private:
  std::ostream& out_;
  std::mutex mu_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string run_summary(const training::RunResult& r, double seconds) {
  const auto it = r.report.splits.find("lrl_test");
  const double test = it == r.report.splits.end() ? 0.0 : it->second.macro;
  std::string mech;
  for (const auto& m : r.report.mechanisms) mech += (mech.empty() ? "" : "+") + m;
  return r.report.method + " seed " + std::to_string(r.report.seed) + " [" + (mech.empty() ? "none" : mech) +
         "]: lrl_test macro-F1 " + fmt("%.4f", test) + ", best epoch " + std::to_string(r.report.best_epoch) + ", " +
         fmt("%.1f", seconds) + " s";
}

json timing_json(const training::Timing& t, double total) {
  return {{"pretrain_seconds", t.pretrain_seconds}, {"epoch_seconds", t.epoch_seconds}, {"total_seconds", total}};
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const PrerequisiteError*>(&e)) return kExitPrerequisite;
  if (dynamic_cast<const ArtifactError*>(&e)) return kExitArtifact;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  return kExitConfig;
}

fs::path data_dir(const ExperimentConfig& cfg) { return fs::path(cfg.out_dir) / "data"; }

fs::path run_dir(const ExperimentConfig& cfg, const std::string& method, std::uint64_t seed) {
  return fs::path(cfg.out_dir) / "runs" / method / ("seed-" + std::to_string(seed));
}

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd s;
  s.n = xs.size();
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

void run_parallel(std::vector<std::function<void()>> jobs, std::size_t threads) {
  threads = std::max<std::size_t>(1, std::min(threads, jobs.size()));
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      try {
        jobs[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void cmd_generate(const ExperimentConfig& cfg, bool force, std::ostream& log) {
  if (cfg.data) throw ConfigError("generate writes the synthetic corpus; remove 'data' from the config");
  const fs::path dir = data_dir(cfg);
  const fs::path hrl = dir / "hrl.jsonl", lrl = dir / "lrl.jsonl", lex = dir / "lexicon.tsv", spec = dir / "spec.json";
  if (!force)
    for (const auto& p : {hrl, lrl, lex, spec})
      if (fs::exists(p)) throw ConfigError(p.string() + " already exists; pass --force to overwrite");
  const auto corpus = corpus::generate_synthetic(cfg.synthetic);
  fs::create_directories(dir);
  corpus::save_dataset(corpus.hrl, hrl);
  corpus::save_dataset(corpus.lrl, lrl);
  corpus.lexicon.save(lex);
  write_text(spec, to_json(cfg.synthetic).dump(2) + "\n");
  log << "wrote " << dir.string() << ": HRL " << corpus.hrl.train.size() << "/" << corpus.hrl.validation.size() << "/"
      << corpus.hrl.test.size() << ", LRL " << corpus.lrl.train.size() << "/" << corpus.lrl.validation.size() << "/"
      << corpus.lrl.test.size() << " (train/validation/test), lexicon " << corpus.lexicon.size() << " entries\n";
}

Corpus corpus_for_training(const ExperimentConfig& cfg) {
  if (cfg.data) {
    for (const auto* p : {&cfg.data->hrl, &cfg.data->lrl, &cfg.data->lexicon})
      if (!p->empty() && !fs::exists(*p)) throw PrerequisiteError("dataset file " + *p + " does not exist");
    return load_corpus(cfg);
  }
  const fs::path dir = data_dir(cfg);
  const fs::path hrl = dir / "hrl.jsonl", lrl = dir / "lrl.jsonl", lex = dir / "lexicon.tsv";
  for (const auto& p : {hrl, lrl})
    if (!fs::exists(p))
      throw PrerequisiteError(p.string() + " not found; run `xlbridge generate` with the same --out first");
  Corpus c;
  c.hrl = corpus::load_dataset(hrl, cfg.synthetic.task);
  c.lrl = corpus::load_dataset(lrl, cfg.synthetic.task);
  if (fs::exists(lex)) c.lexicon = lexicon::Lexicon::load(lex);
  return c;
}

void cmd_train(const ExperimentConfig& cfg, bool force, std::size_t threads, std::ostream& out) {
  Experiment exp(cfg, corpus_for_training(cfg));
  for (const auto& m : cfg.methods)
    if (training::parse_method(m).tet && !exp.data().lexicon)
      throw PrerequisiteError("method '" + m + "' uses embedding transfer and needs a bilingual lexicon (lexicon.tsv)");
  Log log(out);
  std::vector<std::function<void()>> jobs;
  for (const auto& method : cfg.methods) {
    for (const auto seed : cfg.seeds) {
      const fs::path dir = run_dir(cfg, method, seed);
      if (!force && fs::exists(dir / "report.json")) {
        log.line(method + " seed " + std::to_string(seed) + ": kept existing run (pass --force to retrain)");
        continue;
      }
      jobs.push_back([&exp, &log, method, seed, dir] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto result = exp.run(method, seed);
        const double total = seconds_since(t0);
        fs::create_directories(dir);
        model::save_checkpoint(result.best, dir / "checkpoint.json");
        exp.data().tokenizer.save(dir / "tokenizer.txt");
        write_text(dir / "report.json", training::to_json(result.report).dump(2) + "\n");
        write_text(dir / "epochs.csv", training::epochs_csv(result.report));
        write_text(dir / "timing.json", timing_json(result.timing, total).dump(2) + "\n");
        log.line(run_summary(result, total));
      });
    }
  }
  run_parallel(std::move(jobs), threads);
}

void cmd_eval(const ExperimentConfig& cfg, std::ostream& log) {
  std::optional<Corpus> corpus;
  for (const auto& method : cfg.methods) {
    for (const auto seed : cfg.seeds) {
      const fs::path dir = run_dir(cfg, method, seed);
      const fs::path path = dir / "checkpoint.json";
      if (!fs::exists(path)) throw ArtifactError("checkpoint " + path.string() + " not found; run `xlbridge train` first");
      const model::Checkpoint ckpt = model::load_checkpoint(path);
      if (!corpus) corpus = corpus_for_training(cfg);

      training::TrainConfig tc;
      std::vector<std::string> pieces;
      try {
        tc = training::train_config_from_json(ckpt.extra.at("train_config"));
        pieces = ckpt.extra.at("tokenizer_pieces").get<std::vector<std::string>>();
        if (ckpt.extra.at("method").get<std::string>() != method)
          throw ArtifactError(path.string() + " holds a '" + ckpt.extra.at("method").get<std::string>() + "' model");
      } catch (const json::exception& e) {
        throw ArtifactError(path.string() + " lacks run metadata: " + e.what());
      }
      if (pieces.size() < corpus::Tokenizer::kNumSpecials) throw ArtifactError(path.string() + " has no tokenizer");
      pieces.erase(pieces.begin(), pieces.begin() + corpus::Tokenizer::kNumSpecials);
      const auto data = training::prepare_data(corpus->hrl, corpus->lrl, corpus->lexicon ? &*corpus->lexicon : nullptr,
                                               cfg.vocab_size, ckpt.config.max_len, corpus::Tokenizer::from_pieces(pieces));
      if (data.tokenizer.size() != ckpt.config.vocab_size)
        throw ArtifactError(path.string() + " tokenizer does not match its embedding table");

      const training::Method m = training::parse_method(method);
      const model::Encoder<float> enc(ckpt.config, ckpt.params);
      const auto splits = training::evaluate_splits(enc, data, tc, m);
      json out = {{"method", method}, {"seed", seed}, {"splits", json::object()}};
      std::string line = method + " seed " + std::to_string(seed) + ":";
      for (const auto& [name, f1] : splits) {
        out["splits"][name] = {{"macro_f1", f1.macro}};
        line += " " + name + " " + fmt("%.4f", f1.macro);
      }
      write_text(dir / "eval.json", out.dump(2) + "\n");
      log << line << '\n';
    }
  }
}

namespace {

struct Sweep {
  std::string name;
  std::vector<std::string> methods;
  std::vector<std::string> values;
  /// Applies one grid value to copies of the encoder / training configs.
  std::function<void(const std::string&, model::EncoderConfig&, training::TrainConfig&)> apply;
};

std::size_t to_size(const std::string& v) { return static_cast<std::size_t>(std::stoul(v)); }

const std::vector<Sweep>& sweeps() {
  static const std::vector<Sweep> all = {
      {"alpha",
       {"hal"},
       {"0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8"},
       [](const std::string& v, model::EncoderConfig& e, training::TrainConfig&) { e.hal.alpha = std::stod(v); }},
      {"hal_depth",
       {"hal"},
       {"1", "2", "3"},
       [](const std::string& v, model::EncoderConfig& e, training::TrainConfig&) { e.hal.depth = to_size(v); }},
      {"gnn_depth",
       {"getr_gat"},
       {"1", "2", "3"},
       [](const std::string& v, model::EncoderConfig& e, training::TrainConfig&) { e.getr.depth = to_size(v); }},
      {"edge_retention",
       {"getr_gat"},
       {"1.0", "0.7", "0.5", "0.3", "0.0"},
       [](const std::string& v, model::EncoderConfig&, training::TrainConfig& t) { t.edge_retention = std::stod(v); }},
      {"size_ratio",
       {"joint", "getr_gat"},
       {"10", "50", "100", "500"},
       [](const std::string&, model::EncoderConfig&, training::TrainConfig&) {}},
      {"batch_size",
       {"joint", "getr_gat"},
       {"16", "32", "64"},
       [](const std::string& v, model::EncoderConfig&, training::TrainConfig& t) {
         t.batching.batch_size = to_size(v);
       }},
  };
  return all;
}

std::string sweep_table(const Sweep& sweep, const std::vector<std::string>& methods, const std::vector<SweepRow>& rows,
                        const std::vector<double>* reference) {
  std::ostringstream md;
  md << "| " << sweep.name;
  for (const auto& m : methods) md << " | " << m;
  md << " |\n|---";
  for (std::size_t i = 0; i < methods.size(); ++i) md << "|---";
  md << "|\n";
  for (const auto& value : sweep.values) {
    md << "| " << value;
    for (const auto& m : methods) {
      std::vector<double> xs;
      for (const auto& r : rows)
        if (r.value == value && r.method == m) xs.push_back(r.macro_f1.at("lrl_test"));
      md << " | " << mean_std_cell(xs);
    }
    md << " |\n";
  }
  if (reference) md << "\njoint (reference): " << mean_std_cell(*reference) << "\n";
  md << "\nLRL test macro-F1, mean ± std over seeds.\n";
  return md.str();
}

}  // namespace

const std::vector<std::string>& sweep_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& s : sweeps()) out.push_back(s.name);
    return out;
  }();
  return names;
}

std::vector<SweepRow> cmd_ablate(const ExperimentConfig& cfg, const std::string& sweep_name,
                                 const std::vector<std::string>& methods_override, std::size_t threads,
                                 std::ostream& out) {
  const auto it = std::find_if(sweeps().begin(), sweeps().end(), [&](const Sweep& s) { return s.name == sweep_name; });
  if (it == sweeps().end()) {
    std::string known;
    for (const auto& n : sweep_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown sweep '" + sweep_name + "' (known: " + known + ")");
  }
  const Sweep& sweep = *it;
  const auto methods = methods_override.empty() ? sweep.methods : methods_override;
  for (const auto& m : methods) training::parse_method(m);
  const bool edge_sweep = sweep.name == "edge_retention";

  // Size sweeps truncate one corpus so every grid point shares validation/test data.
  ExperimentConfig base_cfg = cfg;
  std::size_t max_lrl = 0;
  if (sweep.name == "size_ratio") {
    for (const auto& v : sweep.values) max_lrl = std::max(max_lrl, to_size(v));
    if (!cfg.data) base_cfg.synthetic.lrl_sizes.train = std::max(cfg.synthetic.lrl_sizes.train, max_lrl);
  }
  const Corpus corpus = load_corpus(base_cfg);
  if (max_lrl > corpus.lrl.train.size())
    throw ConfigError("size_ratio needs " + std::to_string(max_lrl) + " LRL training instances, the data has " +
                      std::to_string(corpus.lrl.train.size()));

  std::vector<std::unique_ptr<Experiment>> experiments;
  std::vector<std::size_t> exp_of_value(sweep.values.size(), 0);
  if (sweep.name == "size_ratio") {
    for (std::size_t v = 0; v < sweep.values.size(); ++v) {
      Corpus sub = corpus;
      sub.lrl.train.resize(to_size(sweep.values[v]));
      experiments.push_back(std::make_unique<Experiment>(cfg, sub));
      exp_of_value[v] = v;
    }
  } else {
    experiments.push_back(std::make_unique<Experiment>(cfg, corpus));
  }

  Log log(out);
  std::vector<SweepRow> rows;
  std::vector<std::function<void()>> jobs;
  struct Job {
    std::size_t value;
    std::string method;
    std::uint64_t seed;
  };
  std::vector<Job> specs;
  for (std::size_t v = 0; v < sweep.values.size(); ++v)
    for (const auto& m : methods)
      for (const auto seed : cfg.seeds) specs.push_back({v, m, seed});
  if (edge_sweep)
    for (const auto seed : cfg.seeds) specs.push_back({sweep.values.size(), "joint", seed});
  rows.resize(specs.size());

  for (std::size_t j = 0; j < specs.size(); ++j) {
    jobs.push_back([&, j] {
      const Job& spec = specs[j];
      const bool reference = spec.value == sweep.values.size();
      const std::string value = reference ? "reference" : sweep.values[spec.value];
      model::EncoderConfig enc = cfg.encoder;
      training::TrainConfig tc = cfg.train;
      if (!reference) sweep.apply(value, enc, tc);
      Experiment& exp = *experiments[reference ? 0 : exp_of_value[spec.value]];
      const auto t0 = std::chrono::steady_clock::now();
      const auto result = exp.run(spec.method, spec.seed, enc, tc);
      SweepRow row{value, spec.method, spec.seed, {}};
      for (const auto& [name, f1] : result.report.splits) row.macro_f1[name] = f1.macro;
      rows[j] = row;
      log.line(sweep.name + "=" + value + " " + run_summary(result, seconds_since(t0)));
    });
  }
  run_parallel(std::move(jobs), threads);

  std::ostringstream csv;
  csv.precision(17);
  csv << "sweep,value,method,seed,lrl_test,lrl_validation,hrl_test\n";
  for (const auto& r : rows) {
    csv << sweep.name << ',' << r.value << ',' << r.method << ',' << r.seed;
    for (const char* split : kSplits) {
      const auto s = r.macro_f1.find(split);
      csv << ',';
      if (s != r.macro_f1.end()) csv << s->second;
    }
    csv << '\n';
  }
  std::vector<double> reference;
  for (const auto& r : rows)
    if (r.value == "reference") reference.push_back(r.macro_f1.at("lrl_test"));
  const fs::path dir = fs::path(cfg.out_dir) / "ablations" / sweep.name;
  write_text(dir / "results.csv", csv.str());
  const std::string table = sweep_table(sweep, methods, rows, edge_sweep ? &reference : nullptr);
  write_text(dir / "table.md", table);
  out << table;
  return rows;
}

void cmd_report(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path runs = fs::path(cfg.out_dir) / "runs";
  if (!fs::is_directory(runs)) throw ArtifactError("no runs under " + runs.string() + "; run `xlbridge train` first");

  // method -> split -> values over seeds
  std::map<std::string, std::map<std::string, std::vector<double>>> results;
  for (const auto& method_dir : fs::directory_iterator(runs)) {
    if (!method_dir.is_directory()) continue;
    for (const auto& seed_dir : fs::directory_iterator(method_dir.path())) {
      const fs::path report = seed_dir.path() / "report.json";
      if (!fs::exists(report)) continue;
      const json j = read_json(report);
      auto& per_split = results[method_dir.path().filename().string()];
      for (const auto& [split, body] : j.at("splits").items()) per_split[split].push_back(body.at("macro_f1").get<double>());
    }
  }
  if (results.empty()) throw ArtifactError("no report.json files under " + runs.string());

  std::vector<std::string> order;
  for (const auto& m : training::method_names())
    if (results.count(m)) order.push_back(m);
  for (const auto& [m, _] : results)
    if (std::find(order.begin(), order.end(), m) == order.end()) order.push_back(m);

  std::ostringstream csv, md;
  csv.precision(17);
  csv << "method,seeds";
  md << "| Method | Seeds";
  for (const char* split : kSplits) {
    csv << ',' << split << "_mean," << split << "_std";
    md << " | " << split;
  }
  csv << '\n';
  md << " |\n|---|---|---|---|---|\n";
  for (const auto& m : order) {
    const auto& per_split = results.at(m);
    std::size_t n = 0;
    for (const auto& [_, xs] : per_split) n = std::max(n, xs.size());
    csv << m << ',' << n;
    md << "| " << m << " | " << n;
    for (const char* split : kSplits) {
      const auto it = per_split.find(split);
      const std::vector<double> xs = it == per_split.end() ? std::vector<double>{} : it->second;
      if (xs.empty()) csv << ",,";
      else {
        const MeanStd s = mean_std(xs);
        csv << ',' << s.mean << ',' << s.std;
      }
      md << " | " << mean_std_cell(xs);
    }
    csv << '\n';
    md << " |\n";
  }
  md << "\nMacro-F1, mean ± std over seeds.\n";
  const fs::path dir = fs::path(cfg.out_dir) / "report";
  write_text(dir / "summary.csv", csv.str());
  write_text(dir / "summary.md", md.str());
  log << md.str();
}

}  // namespace xlb::cli
