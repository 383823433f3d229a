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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "permglm/measure_kind.hpp"
#include "permglm/synthetic.hpp"

namespace permglm {

/// The seven standard deviations sigma_1..sigma_7 of the simulation study.
inline constexpr std::array<double, 7> kStudySigmas = {0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.25};

struct ExperimentReport {
  FieldSpec spec;
  std::size_t replicates = 0;
  std::size_t permutations = 0;
  double alpha = 0.05;
  std::vector<MeasureKind> methods;
  /// Rejection rate at alpha per method.
  std::map<MeasureKind, double> rates;
  /// 95% normal-approximation half-widths, 1.96 sqrt(rate (1 - rate) / reps).
  std::map<MeasureKind, double> ci_half_width;
  /// p-values per method, one per replicate.
  std::map<MeasureKind, std::vector<double>> p_values;
};

struct ExperimentOptions {
  std::size_t threads = 1;
  std::size_t block_width = 16;
};

/// Repeats simulate -> permutation test `replicates` times with seeds derived
/// from spec.seed. Raw permutations for M0/M1/M1', Freedman-Lane for M2.
ExperimentReport run_experiment(const FieldSpec& spec, std::size_t replicates,
                                std::size_t permutations, double alpha,
                                const std::vector<MeasureKind>& methods,
                                const ExperimentOptions& options = {});

/// Experiment configuration file (JSON), one table per (model, error) and a
/// column per sigma.
struct ExperimentConfig {
  std::string name = "experiment";
  Model model = Model::M0;
  std::vector<ErrorKind> errors{ErrorKind::a};
  std::vector<double> sigmas{0.1};
  std::size_t width = 21;
  std::size_t height = 21;
  std::size_t subjects_per_group = 10;
  double rho = 0.15;
  std::size_t replicates = 400;
  std::size_t permutations = 499;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::vector<MeasureKind> methods{kAllMeasures.begin(), kAllMeasures.end()};

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// Named presets: "table-<model><error>" with model in {M0, M1, M1prime} and
/// error in a..g (e.g. "table-M1c"), desk scale (21 x 21, 10 + 10, J = 499).
ExperimentConfig experiment_preset(const std::string& name);

/// Rows = methods, columns = sigmas, cells = rejection rates.
std::string format_rate_table(const std::vector<ExperimentReport>& column_reports);

}  // namespace permglm
