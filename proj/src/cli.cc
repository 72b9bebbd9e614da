// Copyright 2026 The Surgeon Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "surgeon/cli.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "surgeon/error.h"
#include "surgeon/fileio.h"
#include "surgeon/gradcheck.h"
#include "surgeon/keyvalue.h"
#include "surgeon/protocol.h"

namespace surgeon {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void BadValue(const std::string& where, const std::string& key,
                           const std::string& value, std::string_view expected) {
  throw InvalidArgument(fmt::format("{}: {} = '{}': expected {}", where, key, value, expected));
}

double ToDouble(const std::string& where, const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    BadValue(where, key, v, "a finite number");
  }
  return out;
}

std::uint64_t ToUnsigned(const std::string& where, const std::string& key,
                         const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    BadValue(where, key, v, "a non-negative integer");
  }
  return out;
}

int ToInt(const std::string& where, const std::string& key, const std::string& v) {
  const std::uint64_t u = ToUnsigned(where, key, v);
  if (u > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    BadValue(where, key, v, "a smaller integer");
  }
  return static_cast<int>(u);
}

bool ToBool(const std::string& where, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  BadValue(where, key, v, "true or false");
}

std::vector<std::string> SplitList(const std::string& v) {
  std::vector<std::string> parts;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

template <typename E>
E ToEnum(const std::string& where, const std::string& key, const std::string& v,
         std::optional<E> parsed, std::string_view expected) {
  if (!parsed) BadValue(where, key, v, expected);
  return *parsed;
}

}  // namespace

void SetSeed(RunConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.train.seed = seed;
  config.sbm.seed = seed;
}

void ApplySetting(RunConfig& c, const std::string& section, const std::string& key,
                  const std::string& v, const std::string& where) {
  const std::string full = section.empty() ? key : section + "." + key;
  using Setter = std::function<void()>;
  TrainConfig& t = c.train;
  const std::map<std::string, Setter> setters{
      {"dataset", [&] { c.dataset = v; }},
      {"out", [&] { c.out = v; }},
      {"checkpoint", [&] { c.checkpoint = v; }},
      {"embeddings", [&] { c.embeddings = v; }},
      {"seed", [&] { SetSeed(c, ToUnsigned(where, full, v)); }},
      {"seeds",
       [&] {
         c.seeds.clear();
         for (const auto& s : SplitList(v)) c.seeds.push_back(ToUnsigned(where, full, s));
         if (c.seeds.empty()) BadValue(where, full, v, "a non-empty list");
       }},
      {"train.mode",
       [&] {
         t.mode = ToEnum(where, full, v, ParseAugmentMode(v), "pre or post");
         c.mode_set = true;
       }},
      {"train.epochs", [&] { t.epochs = ToInt(where, full, v); }},
      {"train.lr", [&] { t.adam.lr = ToDouble(where, full, v); }},
      {"train.beta1", [&] { t.adam.beta1 = ToDouble(where, full, v); }},
      {"train.beta2", [&] { t.adam.beta2 = ToDouble(where, full, v); }},
      {"train.eps", [&] { t.adam.eps = ToDouble(where, full, v); }},
      {"train.batch",
       [&] {
         if (v == "full") {
           t.batch = BatchMode::kFull;
         } else if (v == "neighbor") {
           t.batch = BatchMode::kNeighbor;
         } else {
           BadValue(where, full, v, "full or neighbor");
         }
       }},
      {"train.fanouts",
       [&] {
         t.fanouts.clear();
         for (const auto& s : SplitList(v)) {
           t.fanouts.push_back(s == "all" ? kAllNeighbors : ToUnsigned(where, full, s));
         }
       }},
      {"train.batch_size", [&] { t.batch_size = ToUnsigned(where, full, v); }},
      {"train.aug_dim", [&] { t.aug_dim = ToUnsigned(where, full, v); }},
      {"train.embed_dim", [&] { t.embed_dim = ToUnsigned(where, full, v); }},
      {"train.hidden_dim", [&] { t.hidden_dim = ToUnsigned(where, full, v); }},
      {"train.encoder_layers", [&] { t.encoder_layers = ToUnsigned(where, full, v); }},
      {"train.aug_dropout", [&] { t.aug_dropout = ToDouble(where, full, v); }},
      {"train.encoder_dropout", [&] { t.encoder_dropout = ToDouble(where, full, v); }},
      {"train.dropout",
       [&] { t.aug_dropout = t.encoder_dropout = ToDouble(where, full, v); }},
      {"train.residual", [&] { t.residual = ToBool(where, full, v); }},
      {"train.aug_bias", [&] { t.aug_bias = ToBool(where, full, v); }},
      {"train.encoder_bias", [&] { t.encoder_bias = ToBool(where, full, v); }},
      {"train.embed_head",
       [&] {
         t.embed_head = ToEnum(where, full, v, ParseEmbedHead(v), "head1, head2 or mean");
       }},
      {"train.precision",
       [&] {
         if (v == "f32") {
           t.precision = Precision::kFloat32;
         } else if (v == "f64") {
           t.precision = Precision::kFloat64;
         } else {
           BadValue(where, full, v, "f32 or f64");
         }
       }},
      {"train.checkpoint_every", [&] { c.checkpoint_every = ToInt(where, full, v); }},
      {"train.record_timing", [&] { c.record_timing = ToBool(where, full, v); }},
      {"loss.gamma", [&] { t.loss.gamma = ToDouble(where, full, v); }},
      {"loss.constraint",
       [&] {
         t.loss.constraint =
             ToEnum(where, full, v, ParseConstraintMode(v), "row or column");
       }},
      {"loss.invariance",
       [&] { t.loss.invariance = ToEnum(where, full, v, ParseReduction(v), "mean or sum"); }},
      {"probe.epochs", [&] { c.probe.epochs = ToInt(where, full, v); }},
      {"probe.lr", [&] { c.probe.lr = ToDouble(where, full, v); }},
      {"probe.task",
       [&] { c.expect_task = ToEnum(where, full, v, ParseTaskKind(v), "BC, MCC or MLC"); }},
      {"sbm.blocks", [&] { c.sbm.blocks = ToUnsigned(where, full, v); }},
      {"sbm.nodes_per_block", [&] { c.sbm.nodes_per_block = ToUnsigned(where, full, v); }},
      {"sbm.p_in", [&] { c.sbm.p_in = ToDouble(where, full, v); }},
      {"sbm.p_out", [&] { c.sbm.p_out = ToDouble(where, full, v); }},
      {"sbm.feature_dim", [&] { c.sbm.feature_dim = ToUnsigned(where, full, v); }},
      {"sbm.signal_strength", [&] { c.sbm.signal_strength = ToDouble(where, full, v); }},
      {"bench.warmup", [&] { c.bench.warmup = ToInt(where, full, v); }},
      {"bench.epochs", [&] { c.bench.timed = ToInt(where, full, v); }},
      {"bench.nodes",
       [&] {
         c.bench.nodes.clear();
         for (const auto& s : SplitList(v)) c.bench.nodes.push_back(ToUnsigned(where, full, s));
       }},
  };
  const auto it = setters.find(full);
  if (it == setters.end()) {
    throw InvalidArgument(fmt::format("{}: unknown setting '{}'", where, full));
  }
  it->second();
}

void ApplyConfigFile(RunConfig& config, const std::string& path) {
  const KeyValueDoc doc = ParseKeyValue(ReadFileBytes(path), path);
  for (const auto& [section, entries] : doc.sections) {
    for (const auto& [key, value_line] : entries) {
      ApplySetting(config, section, key, value_line.first,
                   fmt::format("{}:{}", path, value_line.second));
    }
  }
}

std::string ResultsLine(const Metrics& metrics, std::uint64_t seed) {
  return fmt::format("metric={} value={:.6f} split=test seed={}", metrics.name,
                     metrics.value, seed);
}

namespace {

void Require(const std::string& value, std::string_view flag, std::string_view command) {
  if (value.empty()) {
    throw InvalidArgument(fmt::format("{} needs {} (flag or config file)", command, flag));
  }
}

void EnsureDirectory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError(fmt::format("cannot create output directory '{}': {}", dir,
                              ec ? ec.message() : "not a directory"));
  }
}

Metrics ProbeOnSplit(const Matrix<double>& z, const DatasetBundle& data,
                     const ProbeConfig& probe, std::span<const NodeIndex> split) {
  if (z.rows() != static_cast<std::size_t>(data.num_nodes())) {
    throw InvalidArgument(fmt::format("embeddings have {} rows, dataset has {} nodes",
                                      z.rows(), data.num_nodes()));
  }
  const ProbeModel model = FitProbe(z, data.labels, data.splits.train, probe);
  return Evaluate(model, z, data.labels, split);
}

int CmdSynth(const RunConfig& c, std::ostream& out) {
  Require(c.out, "--out", "synth");
  const DatasetBundle bundle = GenerateSbm(c.sbm);
  WriteDataset(c.out, bundle);
  out << "dataset=" << c.out << " " << bundle.Summary() << "\n";
  return kExitOk;
}

template <typename T>
int TrainAs(const RunConfig& c, const DatasetBundle& data, std::ostream& out) {
  const fs::path dir(c.out);
  EnsureDirectory((dir / "checkpoints").string());
  auto checkpoint_path = [&](int epoch) {
    return (dir / "checkpoints" / fmt::format("epoch_{:04d}.gsrg", epoch)).string();
  };
  auto on_checkpoint = [&](int epoch, const Model<T>& model) {
    SaveCheckpoint(checkpoint_path(epoch), model);
  };

  SelectionResult<T> run =
      TrainWithSelection<T>(data, c.train, c.probe, c.checkpoint_every, on_checkpoint);
  TrainHistory& history = run.fit.history;
  if (!c.record_timing) {
    for (EpochRecord& r : history.epochs) r.ms = 0.0;
  }
  history.WriteCsv((dir / "history.csv").string());

  std::string table = fmt::format("epoch,val_{0},test_{0}\n", run.scores.front().val.name);
  for (const CheckpointScore& s : run.scores) {
    spdlog::info("epoch {} val {}={:.4f}", s.epoch, s.val.name, s.val.value);
    table += fmt::format("{},{:.6f},{:.6f}\n", s.epoch, s.val.value, s.test.value);
  }
  WriteFileAtomic((dir / "selection.csv").string(), table);

  const CheckpointScore& chosen = run.chosen();
  fs::copy_file(checkpoint_path(chosen.epoch), (dir / "best.gsrg").string(),
                fs::copy_options::overwrite_existing);
  const std::string line = ResultsLine(chosen.test, c.seed);
  WriteFileAtomic((dir / "results.txt").string(), line + "\n");
  out << "best_epoch=" << chosen.epoch << " " << line << "\n";
  return kExitOk;
}

int CmdTrain(const RunConfig& c, std::ostream& out) {
  Require(c.dataset, "--dataset", "train");
  Require(c.out, "--out", "train");
  const DatasetBundle data = LoadDataset(c.dataset);
  if (c.train.precision == Precision::kFloat64) return TrainAs<double>(c, data, out);
  return TrainAs<float>(c, data, out);
}

template <typename T>
Matrix<double> EmbedFromCheckpoint(const RunConfig& c, const DatasetBundle& data) {
  const Model<T> model = LoadCheckpoint<T>(c.checkpoint);
  if (c.mode_set && model.mode != c.train.mode) {
    throw InvalidArgument(fmt::format("checkpoint was trained in {} mode, config asks for {}",
                                      AugmentModeName(model.mode),
                                      AugmentModeName(c.train.mode)));
  }
  return Embed(data.graph, data.features, model, c.train.embed_head).template Cast<double>();
}

Matrix<double> EmbedForCommand(const RunConfig& c, const DatasetBundle& data) {
  if (c.train.precision == Precision::kFloat64) return EmbedFromCheckpoint<double>(c, data);
  return EmbedFromCheckpoint<float>(c, data);
}

int CmdEmbed(const RunConfig& c, std::ostream& out) {
  Require(c.dataset, "--dataset", "embed");
  Require(c.checkpoint, "--checkpoint", "embed");
  Require(c.out, "--out", "embed");
  const DatasetBundle data = LoadDataset(c.dataset);
  const Matrix<double> z = EmbedForCommand(c, data);
  EnsureDirectory(c.out);
  const std::string path = (fs::path(c.out) / "embeddings.gsem").string();
  SaveEmbeddings(path, z.Cast<float>());
  out << "embeddings=" << path << " rows=" << z.rows() << " cols=" << z.cols() << "\n";
  return kExitOk;
}

int CmdEval(const RunConfig& c, std::ostream& out) {
  Require(c.dataset, "--dataset", "eval");
  if (c.checkpoint.empty() == c.embeddings.empty()) {
    throw InvalidArgument("eval needs exactly one of --checkpoint or --embeddings");
  }
  const DatasetBundle data = LoadDataset(c.dataset);
  if (c.expect_task && *c.expect_task != data.labels.task) {
    throw InvalidArgument(fmt::format("task-kind mismatch: config expects {}, dataset is {}",
                                      TaskKindName(*c.expect_task),
                                      TaskKindName(data.labels.task)));
  }
  const Matrix<double> z = c.embeddings.empty()
                               ? EmbedForCommand(c, data)
                               : LoadEmbeddings(c.embeddings).Cast<double>();
  const Metrics m = ProbeOnSplit(z, data, c.probe, data.splits.test);
  const std::string line = ResultsLine(m, c.seed);
  if (!c.out.empty()) {
    EnsureDirectory(c.out);
    WriteFileAtomic((fs::path(c.out) / "results.txt").string(), line + "\n");
  }
  out << line << "\n";
  return kExitOk;
}

struct BenchRow {
  std::size_t nodes = 0;
  AugmentMode mode = AugmentMode::kPre;
  ConstraintMode constraint = ConstraintMode::kColumn;
  int epochs_timed = 0;
  double ms_per_epoch = 0.0;
  std::int64_t peak_bytes = 0;
  std::size_t constraint_bytes = 0;
  std::size_t encoder_forwards = 0;
};

template <typename T>
BenchRow BenchCell(const DatasetBundle& data, TrainConfig cfg, const BenchConfig& bench) {
  cfg.epochs = bench.warmup + bench.timed;
  Trainer<T> trainer(data.graph, data.features, cfg);
  for (int i = 0; i < bench.warmup; ++i) trainer.RunEpoch();
  BenchRow row;
  row.nodes = static_cast<std::size_t>(data.num_nodes());
  row.mode = cfg.mode;
  row.constraint = cfg.loss.constraint;
  row.epochs_timed = bench.timed;
  for (int i = 0; i < bench.timed; ++i) {
    const EpochRecord rec = trainer.RunEpoch();
    row.ms_per_epoch += rec.ms / bench.timed;
    row.peak_bytes = std::max(row.peak_bytes, rec.peak_bytes);
    row.constraint_bytes = std::max(row.constraint_bytes, rec.constraint_bytes);
    row.encoder_forwards = rec.encoder_forwards;
  }
  return row;
}

int CmdBench(const RunConfig& c, std::ostream& out) {
  if (c.bench.warmup < 3) throw InvalidArgument("bench needs at least 3 warmup epochs");
  if (c.bench.timed < 10) throw InvalidArgument("bench needs at least 10 timed epochs");
  std::vector<DatasetBundle> datasets;
  if (!c.dataset.empty()) {
    datasets.push_back(LoadDataset(c.dataset));
  } else if (c.bench.nodes.empty()) {
    datasets.push_back(GenerateSbm(c.sbm));
  } else {
    for (std::size_t n : c.bench.nodes) {
      SbmConfig s = c.sbm;
      if (n % s.blocks != 0) {
        throw InvalidArgument(fmt::format("bench size {} is not a multiple of {} blocks", n,
                                          s.blocks));
      }
      s.nodes_per_block = n / s.blocks;
      datasets.push_back(GenerateSbm(s));
    }
  }
  std::vector<BenchRow> rows;
  for (const DatasetBundle& data : datasets) {
    for (AugmentMode mode : {AugmentMode::kPre, AugmentMode::kPost}) {
      for (ConstraintMode cm : {ConstraintMode::kRow, ConstraintMode::kColumn}) {
        TrainConfig cfg = c.train;
        cfg.mode = mode;
        cfg.loss.constraint = cm;
        rows.push_back(cfg.precision == Precision::kFloat64
                           ? BenchCell<double>(data, cfg, c.bench)
                           : BenchCell<float>(data, cfg, c.bench));
      }
    }
  }
  std::string csv =
      "nodes,mode,constraint,epochs_timed,ms_per_epoch,peak_bytes,constraint_bytes,"
      "encoder_forwards\n";
  out << fmt::format("{:>7} {:>5} {:>7} {:>6} {:>12} {:>14} {:>16} {:>8}\n", "nodes",
                     "mode", "loss", "epochs", "ms/epoch", "peak_bytes", "constraint_bytes",
                     "enc_fwd");
  for (const BenchRow& r : rows) {
    csv += fmt::format("{},{},{},{},{:.3f},{},{},{}\n", r.nodes, AugmentModeName(r.mode),
                       ConstraintModeName(r.constraint), r.epochs_timed, r.ms_per_epoch,
                       r.peak_bytes, r.constraint_bytes, r.encoder_forwards);
    out << fmt::format("{:>7} {:>5} {:>7} {:>6} {:>12.3f} {:>14} {:>16} {:>8}\n", r.nodes,
                       AugmentModeName(r.mode), ConstraintModeName(r.constraint),
                       r.epochs_timed, r.ms_per_epoch, r.peak_bytes, r.constraint_bytes,
                       r.encoder_forwards);
  }
  if (!c.out.empty()) {
    EnsureDirectory(c.out);
    WriteFileAtomic((fs::path(c.out) / "bench.csv").string(), csv);
  }
  return kExitOk;
}

int CmdGradCheck(const RunConfig& c, const std::string& corrupt_op, std::ostream& out,
                 std::ostream& err) {
  GradCheckSuiteConfig suite;
  suite.seeds = c.seeds;
  if (!corrupt_op.empty()) {
    const auto kind = OpFromName(corrupt_op);
    if (!kind || *kind == OpKind::kLeaf) {
      throw InvalidArgument("unknown op '" + corrupt_op + "'");
    }
    suite.tape.corrupt_backward = kind;
  }
  std::vector<std::string> failed;
  for (const OpCheck& r : RunGradCheckSuite(suite)) {
    out << fmt::format("op={} max_rel_error={:.3e} checked={} skipped={} status={}\n", r.name,
                       r.max_rel_error, r.checked, r.skipped, r.passed ? "pass" : "FAIL");
    if (!r.passed) failed.push_back(r.name);
  }
  if (!failed.empty()) {
    err << "gradcheck failed: " << fmt::format("{}", fmt::join(failed, ", ")) << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace

int RunCli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  // Diagnostics go to stderr; stdout carries results only.
  static const bool logger_ready = [] {
    spdlog::set_default_logger(spdlog::stderr_color_mt("surgeon"));
    return true;
  }();
  (void)logger_ready;
  CLI::App app{"Self-supervised graph representation learning with learned augmentations",
               "surgeon"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string mode, constraint, dataset, out_dir, checkpoint, embeddings, corrupt_op;
  std::optional<double> gamma;
  std::optional<int> epochs;
  std::vector<std::string> overrides;

  const std::pair<const char*, const char*> commands[] = {
      {"synth", "Generate a stochastic-block-model dataset directory"},
      {"train", "Train, checkpoint, and select the best checkpoint on validation"},
      {"embed", "Write node embeddings of a checkpoint"},
      {"eval", "Fit a linear probe on train and report the test metric"},
      {"bench", "Time pre/post x row/column training epochs"},
      {"gradcheck", "Check every backward rule against finite differences"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option("--seed", seed, "Seed for every random stream");
    sub->add_option("--mode", mode, "pre or post")->check(CLI::IsMember({"pre", "post"}));
    sub->add_option("--constraint", constraint, "row or column")
        ->check(CLI::IsMember({"row", "column"}));
    sub->add_option("--gamma", gamma, "Constraint weight");
    sub->add_option("--epochs", epochs, "Training epochs");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--dataset", dataset, "Dataset directory");
    sub->add_option("--checkpoint", checkpoint, "Checkpoint file");
    sub->add_option("--embeddings", embeddings, "Embedding file (eval)");
    sub->add_option("--set", overrides, "section.key=value override (repeatable)");
    if (std::string_view(name) == "gradcheck") {
      sub->add_option("--corrupt-op", corrupt_op)->group("");
    }
  }

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig c;
    if (!config_path.empty()) ApplyConfigFile(c, config_path);
    for (const std::string& o : overrides) {
      const auto eq = o.find('=');
      const std::string lhs = Trim(o.substr(0, eq));
      if (eq == std::string::npos || lhs.empty()) {
        err << "--set expects section.key=value, got '" << o << "'\n";
        return kExitUsage;
      }
      const auto dot = lhs.find('.');
      const std::string section = dot == std::string::npos ? "" : lhs.substr(0, dot);
      const std::string key = dot == std::string::npos ? lhs : lhs.substr(dot + 1);
      ApplySetting(c, section, key, Trim(o.substr(eq + 1)), "--set");
    }
    if (seed) SetSeed(c, *seed);
    if (!mode.empty()) ApplySetting(c, "train", "mode", mode, "--mode");
    if (!constraint.empty()) ApplySetting(c, "loss", "constraint", constraint, "--constraint");
    if (gamma) c.train.loss.gamma = *gamma;
    if (epochs) c.train.epochs = *epochs;
    if (!out_dir.empty()) c.out = out_dir;
    if (!dataset.empty()) c.dataset = dataset;
    if (!checkpoint.empty()) c.checkpoint = checkpoint;
    if (!embeddings.empty()) c.embeddings = embeddings;

    if (command == "synth") return CmdSynth(c, out);
    if (command == "train") return CmdTrain(c, out);
    if (command == "embed") return CmdEmbed(c, out);
    if (command == "eval") return CmdEval(c, out);
    if (command == "bench") return CmdBench(c, out);
    return CmdGradCheck(c, corrupt_op, out, err);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace surgeon
