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
#include <map>
#include <vector>

#include "permglm/envelope.hpp"
#include "permglm/permutation.hpp"
#include "permglm/rank_measures.hpp"
#include "permglm/streaming.hpp"

namespace permglm {

struct TestConfig {
  std::vector<MeasureKind> methods{kAllMeasures.begin(), kAllMeasures.end()};
  std::size_t permutations = 999;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::raw;
  /// false: materialize the (J+1) x n field and use the naive measures.
  bool streaming = true;
  bool envelopes = true;
  std::size_t threads = 1;
  std::size_t block_width = 16;
  TiePolicy ties = TiePolicy::mid;
  std::size_t erl_slots = 6;

  /// Throws ConfigError on J < 1, alpha outside (0, 1) or no methods.
  void validate() const;
};

struct MethodResult {
  MeasureKind method = MeasureKind::erl;
  double p_value = 1.0;
  double critical_measure = 0.0;
  MeasureVector measure;
  /// Empty observed/upper when envelopes were not requested.
  GlobalEnvelope envelope;
};

struct TestResult {
  double alpha = 0.05;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::raw;
  bool streaming = true;
  std::uint64_t plan_fingerprint = 0;
  std::size_t locations = 0;
  std::vector<std::size_t> location_ids;
  std::size_t degenerate_statistics = 0;
  std::vector<MethodResult> methods;

  const MethodResult* find(MeasureKind kind) const;
  /// True when any method has p <= alpha.
  bool any_rejected() const;
};

/// Full pipeline: plan, measures (streaming or naive), p-values, envelopes.
TestResult run_test(const FunctionalDataset& dataset, const DesignSpec& design,
                    const TestConfig& config);

/// Measures and p-values only, for simulation loops.
std::map<MeasureKind, double> run_pvalues(const FunctionalDataset& dataset,
                                          const DesignSpec& design, const PermutationPlan& plan,
                                          MeasureSet kinds, const StreamingOptions& options = {});

}  // namespace permglm
