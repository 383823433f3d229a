// Copyright 2026 The permglm Authors
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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "permglm/measure_kind.hpp"
#include "permglm/permutation.hpp"

namespace permglm::cli {

enum class Command { test, simulate, experiment, envelope_export };

/// Exit codes. kRejected means the run succeeded and at least one method
/// rejected the null at alpha.
inline constexpr int kSuccess = 0;
inline constexpr int kFailure = 1;
inline constexpr int kRejected = 2;

struct RunConfig {
  Command command = Command::test;
  std::filesystem::path data;
  std::filesystem::path design;
  std::filesystem::path results;
  std::filesystem::path experiment_config;
  std::string preset;
  std::vector<MeasureKind> methods{kAllMeasures.begin(), kAllMeasures.end()};
  std::size_t permutations = 999;
  double alpha = 0.05;
  std::optional<std::uint64_t> seed;
  Scheme scheme = Scheme::raw;
  bool streaming = true;
  std::filesystem::path out_dir = ".";
  std::size_t threads = 0;
  // simulate
  std::string model = "M1";
  std::string error = "a";
  double sigma = 0.1;
  std::size_t width = 21;
  std::size_t height = 21;
  std::size_t subjects_per_group = 10;
  // experiment overrides (0 = keep config value)
  std::size_t replicates = 0;

  void validate() const;
};

int cmd_test(const RunConfig& config);
int cmd_simulate(const RunConfig& config);
int cmd_experiment(const RunConfig& config);
int cmd_envelope_export(const RunConfig& config);

/// Parses arguments (program name first) and dispatches. Errors are printed
/// to stderr and mapped to kFailure.
int run(int argc, const char* const* argv);

/// --threads, then PERMGLM_THREADS, then hardware concurrency.
std::size_t resolve_threads(std::size_t flag_value);

}  // namespace permglm::cli
