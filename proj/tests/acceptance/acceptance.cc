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

// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "surgeon/cli.h"
#include "surgeon/fileio.h"
#include "surgeon/gradcheck.h"
#include "surgeon/objective.h"
#include "surgeon/probe.h"
#include "surgeon/protocol.h"
#include "surgeon/trainer.h"

namespace surgeon {
namespace {

namespace fs = std::filesystem;

const std::string kBenchmarkConfig = SURGEON_SOURCE_DIR "/configs/sbm_benchmark.cfg";
constexpr std::uint64_t kSeeds[] = {0, 1, 2, 3, 4};

struct Outcome {
  bool pass = false;
  std::string detail;
};

RunConfig Benchmark(std::uint64_t seed) {
  RunConfig c;
  ApplyConfigFile(c, kBenchmarkConfig);
  SetSeed(c, seed);
  return c;
}

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string List(const std::vector<double>& v, int precision = 4) {
  std::string s;
  for (double x : v) s += fmt::format("{}{:.{}f}", s.empty() ? "" : " ", x, precision);
  return s;
}

// --- 1 ----------------------------------------------------------------------
Outcome GradientCorrectness() {
  GradCheckSuiteConfig suite;
  suite.seeds.assign(std::begin(kSeeds), std::end(kSeeds));
  suite.epsilon = 1e-5;
  suite.tolerance = 1e-4;
  const auto start = std::chrono::steady_clock::now();
  const auto report = RunGradCheckSuite(suite);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  double worst = 0.0;
  std::string worst_name;
  bool all = true;
  std::size_t ops = 0, graphs = 0;
  for (const OpCheck& r : report) {
    all = all && r.passed;
    (r.name.rfind("end_to_end", 0) == 0 ? graphs : ops) += 1;
    if (r.max_rel_error >= worst) {
      worst = r.max_rel_error;
      worst_name = r.name;
    }
  }
  const bool covers_vocab = ops == kNumOpKinds - 1;  // every op but leaves
  return {all && covers_vocab && secs < 60.0,
          fmt::format("{} ops + {} loss graphs x {} seeds, worst rel err {:.2e} ({}), {:.2f}s",
                      ops, graphs, suite.seeds.size(), worst, worst_name, secs)};
}

// --- 2 ----------------------------------------------------------------------
Outcome LossIdentities() {
  Rng rng = MakeRng(2, 0);
  std::normal_distribution<double> gauss;
  double worst_rel = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    Matrix<double> a(16, 8), b(16, 8);
    for (double& v : a.values()) v = gauss(rng);
    for (double& v : b.values()) v = gauss(rng);
    Tape<double> tape;
    const NodeId inv = InvarianceTerm(tape, UnitRows(tape, tape.Leaf(a, false)),
                                      UnitRows(tape, tape.Leaf(b, false)), Reduction::kSum);
    // Oracle: cosine from the raw rows.
    double expected = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      double dot = 0, na = 0, nb = 0;
      for (std::size_t j = 0; j < a.cols(); ++j) {
        dot += a(i, j) * b(i, j);
        na += a(i, j) * a(i, j);
        nb += b(i, j) * b(i, j);
      }
      expected += 2.0 - 2.0 * dot / std::sqrt(na * nb);
    }
    worst_rel = std::max(worst_rel, std::abs(tape.scalar(inv) - expected) / expected);
  }
  bool exact = true;
  std::string values;
  for (std::size_t rows : {2, 5, 10}) {
    Matrix<double> z(rows, 4);
    z.Fill(1.0);  // normalizes to rows of 0.5, exactly unit length
    Tape<double> tape;
    const double got =
        tape.scalar(ConstraintTerm(tape, UnitRows(tape, tape.Leaf(z, false)), ConstraintMode::kRow));
    const double want = std::sqrt(static_cast<double>(rows * rows - rows));
    exact = exact && got == want;
    values += fmt::format(" B={}:{:.6f}", rows, got);
  }
  return {worst_rel <= 1e-6 && exact,
          fmt::format("invariance rel err {:.1e}; collapsed row constraint{} ({})", worst_rel,
                      values, exact ? "exact" : "NOT exact")};
}

// --- 3 ----------------------------------------------------------------------
Outcome CollapseAvoidance() {
  int wins = 0;
  std::vector<double> with, without;
  for (std::uint64_t seed : kSeeds) {
    RunConfig c = Benchmark(seed);
    const DatasetBundle data = GenerateSbm(c.sbm);
    auto rank = [&](double gamma) {
      TrainConfig t = c.train;
      t.loss.gamma = gamma;
      const auto fit = Fit<float>(data, t);
      return StableRank(Embed(data, fit.model, t).Cast<double>());
    };
    with.push_back(rank(1.0));
    without.push_back(rank(0.0));
    wins += with.back() > without.back();
  }
  return {wins == 5, fmt::format("{}/5 seeds; stable rank gamma=1 [{}] vs gamma=0 [{}]", wins,
                                 List(with, 2), List(without, 2))};
}

// --- 4 ----------------------------------------------------------------------
Outcome RepresentationQuality() {
  std::vector<double> trained, random;
  for (std::uint64_t seed : kSeeds) {
    RunConfig c = Benchmark(seed);
    const DatasetBundle data = GenerateSbm(c.sbm);
    const auto run = TrainWithSelection<float>(data, c.train, c.probe, c.checkpoint_every);
    trained.push_back(run.chosen().test.value);
    const Model<float> init = InitModel<float>(c.train, data.num_features());
    random.push_back(
        ProbeModelOnSplit(data, init, c.train.embed_head, c.probe, data.splits.test).value);
  }
  const double gap = Mean(trained) - Mean(random);
  return {gap >= 0.10,
          fmt::format("trained {:.4f} vs random-init {:.4f}: +{:.1f} points (need >= 10)",
                      Mean(trained), Mean(random), 100 * gap)};
}

// --- 5 ----------------------------------------------------------------------
std::size_t ConstraintBytes(std::size_t nodes, ConstraintMode mode) {
  RunConfig c = Benchmark(0);
  c.sbm.nodes_per_block = nodes / c.sbm.blocks;
  const DatasetBundle data = GenerateSbm(c.sbm);
  TrainConfig t = c.train;
  t.loss.constraint = mode;
  Trainer<float> trainer(data.graph, data.features, t);
  return trainer.RunEpoch().constraint_bytes;
}

Outcome LossFlavorParity() {
  std::vector<double> row, col;
  for (std::uint64_t seed : kSeeds) {
    RunConfig c = Benchmark(seed);
    const DatasetBundle data = GenerateSbm(c.sbm);
    for (ConstraintMode mode : {ConstraintMode::kRow, ConstraintMode::kColumn}) {
      TrainConfig t = c.train;
      t.loss.constraint = mode;
      const auto run = TrainWithSelection<float>(data, t, c.probe, c.checkpoint_every);
      (mode == ConstraintMode::kRow ? row : col).push_back(run.chosen().test.value);
    }
  }
  const double diff = std::abs(Mean(row) - Mean(col));
  std::vector<std::size_t> col_bytes, row_bytes;
  for (std::size_t n : {1000, 2000, 4000}) {
    col_bytes.push_back(ConstraintBytes(n, ConstraintMode::kColumn));
    row_bytes.push_back(ConstraintBytes(n, ConstraintMode::kRow));
  }
  const bool col_constant = col_bytes[0] == col_bytes[1] && col_bytes[1] == col_bytes[2];
  const bool row_superlinear = row_bytes[1] > 2 * row_bytes[0] && row_bytes[2] > 2 * row_bytes[1];
  return {diff <= 0.02 && col_constant && row_superlinear,
          fmt::format("acc row {:.4f} vs column {:.4f} ({:.1f} points); constraint bytes at "
                      "N=1k/2k/4k column {}/{}/{}, row {}/{}/{}",
                      Mean(row), Mean(col), 100 * diff, col_bytes[0], col_bytes[1], col_bytes[2],
                      row_bytes[0], row_bytes[1], row_bytes[2])};
}

// --- 6 ----------------------------------------------------------------------
struct Timing {
  double ms = 0.0;
  std::size_t forwards = 0;
};

Timing TimeEpochs(const DatasetBundle& data, TrainConfig t) {
  Trainer<float> trainer(data.graph, data.features, t);
  for (int i = 0; i < 3; ++i) trainer.RunEpoch();
  std::vector<double> ms;
  Timing out;
  for (int i = 0; i < 10; ++i) {
    const EpochRecord rec = trainer.RunEpoch();
    ms.push_back(rec.ms);
    out.forwards = rec.encoder_forwards;
  }
  out.ms = Mean(ms);
  return out;
}

Outcome PrePostParity() {
  std::vector<double> pre, post;
  for (std::uint64_t seed : kSeeds) {
    RunConfig c = Benchmark(seed);
    const DatasetBundle data = GenerateSbm(c.sbm);
    for (AugmentMode mode : {AugmentMode::kPre, AugmentMode::kPost}) {
      TrainConfig t = c.train;
      t.mode = mode;
      const auto run = TrainWithSelection<float>(data, t, c.probe, c.checkpoint_every);
      (mode == AugmentMode::kPre ? pre : post).push_back(run.chosen().test.value);
    }
  }
  const double diff = std::abs(Mean(pre) - Mean(post));

  RunConfig c = Benchmark(0);
  const DatasetBundle data = GenerateSbm(c.sbm);
  TrainConfig t = c.train;
  t.mode = AugmentMode::kPre;
  const Timing tp = TimeEpochs(data, t);
  t.mode = AugmentMode::kPost;
  const Timing tq = TimeEpochs(data, t);
  const double ratio = tq.ms / tp.ms;
  const bool halved = tp.forwards == 2 * tq.forwards && tq.forwards > 0;
  return {diff <= 0.02 && ratio <= 0.75 && halved,
          fmt::format("acc pre {:.4f} vs post {:.4f} ({:.1f} points); epoch ms pre {:.2f} post "
                      "{:.2f} (ratio {:.2f}, need <= 0.75); encoder forwards {} vs {}",
                      Mean(pre), Mean(post), 100 * diff, tp.ms, tq.ms, ratio, tp.forwards,
                      tq.forwards)};
}

// --- 7 ----------------------------------------------------------------------
Outcome MinibatchConsistency() {
  RunConfig c = Benchmark(0);
  const DatasetBundle data = GenerateSbm(c.sbm);
  TrainConfig full = c.train;
  full.aug_dropout = full.encoder_dropout = 0.0;
  full.precision = Precision::kFloat64;
  TrainConfig sampled = full;
  sampled.batch = BatchMode::kNeighbor;
  sampled.batch_size = static_cast<std::size_t>(data.num_nodes());
  sampled.fanouts.assign(sampled.encoder_layers, kAllNeighbors);
  const auto a = Fit<double>(data, full).history.epochs;
  const auto b = Fit<double>(data, sampled).history.epochs;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i].loss - b[i].loss));
  }
  return {a.size() == b.size() && worst <= 1e-4,
          fmt::format("{} epochs, f64, dropout off; max |loss_full - loss_sampled| = {:.2e}",
                      a.size(), worst)};
}

// --- 8 ----------------------------------------------------------------------
Outcome Convergence() {
  std::vector<double> short_run, long_run;
  for (std::uint64_t seed : kSeeds) {
    RunConfig c = Benchmark(seed);
    const DatasetBundle data = GenerateSbm(c.sbm);
    for (int epochs : {50, 500}) {
      TrainConfig t = c.train;
      t.epochs = epochs;
      const auto run = TrainWithSelection<float>(data, t, c.probe, c.checkpoint_every);
      (epochs == 50 ? short_run : long_run).push_back(run.chosen().test.value);
    }
  }
  const double diff = std::abs(Mean(short_run) - Mean(long_run));
  return {diff <= 0.03,
          fmt::format("best-val test acc 50 epochs {:.4f} [{}] vs 500 epochs {:.4f} [{}]: {:.1f} "
                      "points (mean of 5 seeds)",
                      Mean(short_run), List(short_run), Mean(long_run), List(long_run),
                      100 * diff)};
}

// --- 9 ----------------------------------------------------------------------
int Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  if (code != 0) spdlog::error("surgeon {} failed: {}", args.front(), err.str());
  return code;
}

Outcome Reproducibility() {
  const fs::path root = fs::temp_directory_path() / fmt::format("surgeon_repro_{}", ::getpid());
  fs::remove_all(root);
  const std::string data = (root / "data").string();
  bool ok = Cli({"synth", "--config", kBenchmarkConfig, "--out", data}) == 0;
  const char* files[] = {"history.csv", "results.txt", "selection.csv", "best.gsrg"};
  for (int run = 0; run < 2 && ok; ++run) {
    ok = Cli({"train", "--config", kBenchmarkConfig, "--dataset", data, "--set",
              "train.record_timing=false", "--out", (root / fmt::format("run{}", run)).string()}) ==
         0;
  }
  std::string mismatched;
  for (const char* f : files) {
    if (!ok) break;
    if (ReadFileBytes((root / "run0" / f).string()) != ReadFileBytes((root / "run1" / f).string())) {
      mismatched += std::string(" ") + f;
    }
  }
  // Timed histories: every column but wall time must agree.
  for (int run = 2; run < 4 && ok; ++run) {
    ok = Cli({"train", "--config", kBenchmarkConfig, "--dataset", data, "--out",
              (root / fmt::format("run{}", run)).string()}) == 0;
  }
  auto strip_ms = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
      std::vector<std::string> cols;
      std::istringstream ls(line);
      for (std::string col; std::getline(ls, col, ',');) cols.push_back(col);
      cols.erase(cols.begin() + 5);  // ms
      out += fmt::format("{}\n", fmt::join(cols, ","));
    }
    return out;
  };
  if (ok && strip_ms(ReadFileBytes((root / "run2/history.csv").string())) !=
                strip_ms(ReadFileBytes((root / "run3/history.csv").string()))) {
    mismatched += " history.csv(timed, non-ms columns)";
  }
  fs::remove_all(root);
  return {ok && mismatched.empty(),
          ok ? (mismatched.empty()
                    ? std::string("two runs byte-identical: history.csv, results.txt, "
                                  "selection.csv, best.gsrg; timed runs agree outside ms")
                    : "differs:" + mismatched)
             : std::string("CLI run failed")};
}

}  // namespace
}  // namespace surgeon

int main() {
  using namespace surgeon;
  spdlog::set_level(spdlog::level::warn);
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"gradient correctness", GradientCorrectness},
      {"loss identities", LossIdentities},
      {"collapse avoidance", CollapseAvoidance},
      {"representation quality", RepresentationQuality},
      {"loss-flavor parity and constraint memory", LossFlavorParity},
      {"pre/post parity and resources", PrePostParity},
      {"minibatch consistency", MinibatchConsistency},
      {"convergence", Convergence},
      {"reproducibility", Reproducibility},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("criterion %d %s: %s (%.1fs) %s\n", index, o.pass ? "PASS" : "FAIL", name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
