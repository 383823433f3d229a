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

#include "permglm/pipeline.hpp"

#include <string>

#include "permglm/error.hpp"

namespace permglm {

void TestConfig::validate() const {
  if (permutations < 1) throw ConfigError("number of permutations must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (methods.empty()) throw ConfigError("method set is empty");
  if (block_width < 1) throw ConfigError("block width must be positive");
  const auto kinds = MeasureSet::from(methods);
  if (kinds.needs_continuous_ranks() && permutations < 2)
    throw ConfigError("cont and area need at least 2 permutations");
  if (kinds.contains(MeasureKind::erl) && erl_slots < 1)
    throw ConfigError("ERL needs at least one slot");
}

const MethodResult* TestResult::find(MeasureKind kind) const {
  for (const auto& m : methods)
    if (m.method == kind) return &m;
  return nullptr;
}

bool TestResult::any_rejected() const {
  for (const auto& m : methods)
    if (m.p_value <= alpha) return true;
  return false;
}

TestResult run_test(const FunctionalDataset& dataset, const DesignSpec& design,
                    const TestConfig& config) {
  config.validate();
  dataset.validate();
  design.validate();
  if (design.subjects() != dataset.subjects())
    throw ConsistencyError("design has " + std::to_string(design.subjects()) +
                           " subjects but the dataset has " + std::to_string(dataset.subjects()));
  const auto kinds = MeasureSet::from(config.methods);
  const auto plan =
      generate_plan(config.seed, config.permutations, dataset.subjects(), config.scheme);

  TestResult result;
  result.alpha = config.alpha;
  result.permutations = config.permutations;
  result.seed = config.seed;
  result.scheme = config.scheme;
  result.streaming = config.streaming;
  result.plan_fingerprint = plan.fingerprint();
  result.locations = dataset.locations();
  result.location_ids = dataset.location_ids;
  if (result.location_ids.empty()) {
    result.location_ids.resize(dataset.locations());
    for (std::size_t r = 0; r < result.location_ids.size(); ++r) result.location_ids[r] = r;
  }

  StreamingOptions opts;
  opts.threads = config.threads;
  opts.block_width = config.block_width;
  opts.ties = config.ties;
  opts.erl_slots = config.erl_slots;

  std::map<MeasureKind, MeasureVector> measures;
  StatField field;
  if (config.streaming) {
    auto run = streaming_run(dataset, design, plan, kinds, opts);
    measures = std::move(run.measures);
    result.degenerate_statistics = run.degenerate_count;
  } else {
    field = stat_field(dataset, design, plan, {.block_width = 64, .kernels = nullptr});
    measures = naive_measures(field, kinds, config.ties);
    result.degenerate_statistics = field.degenerate_count;
  }

  std::vector<MeasureVector> ordered;
  for (auto kind : kinds.kinds()) {
    MethodResult m;
    m.method = kind;
    m.measure = measures.at(kind);
    m.p_value = monte_carlo_pvalue(m.measure);
    m.critical_measure = critical_value(m.measure, config.alpha);
    m.envelope.method = kind;
    m.envelope.alpha = config.alpha;
    m.envelope.p_value = m.p_value;
    m.envelope.critical_measure = m.critical_measure;
    ordered.push_back(m.measure);
    result.methods.push_back(std::move(m));
  }

  if (config.envelopes) {
    if (config.streaming) {
      auto envs = upper_envelopes(dataset, design, plan, ordered, config.alpha,
                                  result.plan_fingerprint, opts);
      for (std::size_t i = 0; i < envs.size(); ++i) result.methods[i].envelope = std::move(envs[i]);
    } else {
      for (auto& m : result.methods) m.envelope = envelope_from_field(field, m.measure, config.alpha);
    }
  }
  return result;
}

std::map<MeasureKind, double> run_pvalues(const FunctionalDataset& dataset,
                                          const DesignSpec& design, const PermutationPlan& plan,
                                          MeasureSet kinds, const StreamingOptions& options) {
  const auto run = streaming_run(dataset, design, plan, kinds, options);
  std::map<MeasureKind, double> out;
  for (const auto& [kind, measure] : run.measures) out[kind] = monte_carlo_pvalue(measure);
  return out;
}

}  // namespace permglm
