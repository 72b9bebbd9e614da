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

#ifndef SURGEON_CLI_H_
#define SURGEON_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "surgeon/dataio.h"
#include "surgeon/probe.h"
#include "surgeon/trainer.h"

namespace surgeon {

// Process exit codes; part of the scripting contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

struct BenchConfig {
  int warmup = 3;
  int timed = 10;
  // Synthetic graph sizes to sweep when no dataset is given; empty means the
  // [sbm] section as configured.
  std::vector<std::size_t> nodes;
};

// Everything a command may need. Defaults, then the config file, then
// command-line flags.
struct RunConfig {
  std::string dataset;
  std::string out;
  std::string checkpoint;
  std::string embeddings;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  TrainConfig train;
  bool mode_set = false;  // whether train.mode was given explicitly
  int checkpoint_every = 10;
  // Off writes 0 into the history's ms column, making the file a pure
  // function of config and seed.
  bool record_timing = true;
  ProbeConfig probe;
  std::optional<TaskKind> expect_task;
  SbmConfig sbm;
  BenchConfig bench;
};

// Applies one `key = value` setting from `section`. `where` prefixes error
// messages (e.g. "run.cfg:12"). Throws InvalidArgument.
void ApplySetting(RunConfig& config, const std::string& section,
                  const std::string& key, const std::string& value,
                  const std::string& where);

// Reads a config file on top of `config`.
void ApplyConfigFile(RunConfig& config, const std::string& path);

// Sets the seed everywhere it is consumed.
void SetSeed(RunConfig& config, std::uint64_t seed);

// "metric=<name> value=<v> split=test seed=<n>"
std::string ResultsLine(const Metrics& metrics, std::uint64_t seed);

// Entry point behind the `surgeon` binary; args excludes argv[0]. Returns an
// exit code and never throws.
int RunCli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace surgeon

#endif  // SURGEON_CLI_H_
