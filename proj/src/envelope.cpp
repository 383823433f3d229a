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

#include "permglm/envelope.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "permglm/error.hpp"

namespace permglm {
namespace {

/// Measure values turned so that smaller always means more extreme.
std::vector<double> oriented(const MeasureVector& measure) {
  std::vector<double> v = measure.values;
  if (larger_is_extreme(measure.kind))
    for (auto& x : v) x = -x;
  return v;
}

double oriented_critical(const MeasureVector& measure, double alpha) {
  auto v = oriented(measure);
  if (v.empty()) throw ConsistencyError("empty measure vector");
  const std::size_t k = std::min(rejection_threshold(v.size(), alpha), v.size() - 1);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

}  // namespace

std::size_t GlobalEnvelope::rejection_count() const {
  return static_cast<std::size_t>(std::count(rejected.begin(), rejected.end(), std::uint8_t{1}));
}

std::size_t rejection_threshold(std::size_t functions, double alpha) {
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(functions) + 1e-9));
}

double critical_value(const MeasureVector& measure, double alpha) {
  check_alpha(alpha);
  const double c = oriented_critical(measure, alpha);
  return larger_is_extreme(measure.kind) ? -c : c;
}

std::vector<std::uint8_t> critical_members(const MeasureVector& measure, double alpha) {
  check_alpha(alpha);
  const double c = oriented_critical(measure, alpha);
  const auto v = oriented(measure);
  std::vector<std::uint8_t> members(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) members[j] = v[j] >= c ? 1 : 0;
  return members;
}

GlobalEnvelope envelope_from_field(const StatField& field, const MeasureVector& measure,
                                   double alpha) {
  if (measure.functions() != field.functions())
    throw ConsistencyError("measure and field disagree on the number of functions");
  const auto members = critical_members(measure, alpha);
  const auto n = field.locations();
  GlobalEnvelope env;
  env.method = measure.kind;
  env.alpha = alpha;
  env.critical_measure = critical_value(measure, alpha);
  env.p_value = monte_carlo_pvalue(measure);
  env.observed.resize(n);
  env.upper.assign(n, -std::numeric_limits<double>::infinity());
  env.rejected.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto col = static_cast<Eigen::Index>(r);
    env.observed[r] = field.values(0, col);
    for (std::size_t j = 0; j < members.size(); ++j)
      if (members[j]) env.upper[r] = std::max(env.upper[r], field.values(static_cast<Eigen::Index>(j), col));
    env.rejected[r] = env.observed[r] > env.upper[r] ? 1 : 0;
  }
  return env;
}

std::vector<GlobalEnvelope> upper_envelopes(const FunctionalDataset& dataset,
                                            const DesignSpec& design, const PermutationPlan& plan,
                                            std::span<const MeasureVector> measures, double alpha,
                                            std::uint64_t expected_fingerprint,
                                            const StreamingOptions& options) {
  if (plan.fingerprint() != expected_fingerprint)
    throw ConsistencyError("permutation plan differs from the one used for the measures");
  const auto& kernels = options.kernels ? *options.kernels : simd::active_kernels();
  const StatEngine engine(dataset, design, plan, kernels);
  const std::size_t functions = engine.functions();
  const std::size_t n = engine.locations();

  std::vector<GlobalEnvelope> envs;
  std::vector<std::vector<std::uint32_t>> member_lists;
  for (const auto& m : measures) {
    if (m.functions() != functions)
      throw ConsistencyError("measure vector does not match the plan");
    GlobalEnvelope env;
    env.method = m.kind;
    env.alpha = alpha;
    env.critical_measure = critical_value(m, alpha);
    env.p_value = monte_carlo_pvalue(m);
    env.observed.resize(n);
    env.upper.resize(n);
    env.rejected.resize(n);
    envs.push_back(std::move(env));
    const auto mask = critical_members(m, alpha);
    std::vector<std::uint32_t> list;
    for (std::size_t j = 0; j < mask.size(); ++j)
      if (mask[j]) list.push_back(static_cast<std::uint32_t>(j));
    member_lists.push_back(std::move(list));
  }
  if (envs.empty()) return envs;

  const std::size_t bw = std::max<std::size_t>(1, options.block_width);
  auto scan = [&](std::size_t first, std::size_t last) {
    std::vector<double> block(functions * std::min(bw, last - first));
    StatEngine::Workspace ws;
    for (std::size_t start = first; start < last; start += bw) {
      const std::size_t width = std::min(bw, last - start);
      engine.compute_block(start, width, block, ws);
      for (std::size_t e = 0; e < envs.size(); ++e)
        for (std::size_t b = 0; b < width; ++b) {
          double up = -std::numeric_limits<double>::infinity();
          for (auto j : member_lists[e]) up = std::max(up, block[j * width + b]);
          const std::size_t r = start + b;
          envs[e].observed[r] = block[b];
          envs[e].upper[r] = up;
          envs[e].rejected[r] = block[b] > up ? 1 : 0;
        }
    }
  };

  const std::size_t threads = std::min(resolve_thread_count(options.threads), std::max<std::size_t>(1, n));
  if (threads == 1) {
    scan(0, n);
  } else {
    const std::size_t chunk = std::max<std::size_t>(1, options.chunk_locations);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> workers;
      for (std::size_t w = 0; w < threads; ++w)
        workers.emplace_back([&, w] {
          try {
            for (std::size_t first = next.fetch_add(chunk); first < n; first = next.fetch_add(chunk))
              scan(first, std::min(n, first + chunk));
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return envs;
}

AuditReport envelope_audit(const GlobalEnvelope& env, const MeasureVector& measure,
                           const StatField* field) {
  AuditReport report;
  const std::size_t n = env.observed.size();
  if (env.upper.size() != n || env.rejected.size() != n) {
    report.violations.push_back({Violation::kGlobal, "envelope vectors have different lengths"});
    return report;
  }
  for (std::size_t r = 0; r < n; ++r) {
    const bool crosses = env.observed[r] > env.upper[r];
    if (crosses != (env.rejected[r] != 0))
      report.violations.push_back({r, "rejection mask disagrees with T_0 > T_up"});
  }
  const double p = monte_carlo_pvalue(measure);
  if (p != env.p_value)
    report.violations.push_back({Violation::kGlobal, "stored p-value does not match the measure"});
  if (critical_value(measure, env.alpha) != env.critical_measure)
    report.violations.push_back({Violation::kGlobal, "stored critical value does not match"});
  bool any = false;
  for (std::size_t r = 0; r < n; ++r) any = any || env.observed[r] > env.upper[r];
  if ((p <= env.alpha) != any)
    report.violations.push_back(
        {Violation::kGlobal, any ? "envelope crossed although p > alpha"
                                 : "p <= alpha but the envelope is never crossed"});
  if (field) {
    const auto members = critical_members(measure, env.alpha);
    std::vector<double> column(field->functions());
    for (std::size_t r = 0; r < std::min(n, field->locations()); ++r) {
      const auto col = static_cast<Eigen::Index>(r);
      double up = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < column.size(); ++j) {
        column[j] = field->values(static_cast<Eigen::Index>(j), col);
        if (members[j]) up = std::max(up, column[j]);
      }
      if (up != env.upper[r]) report.violations.push_back({r, "upper bound is not max over I_alpha"});
      if (column[0] != env.observed[r])
        report.violations.push_back({r, "observed statistic does not match the field"});
      std::sort(column.begin(), column.end());
      if (std::adjacent_find(column.begin(), column.end()) != column.end()) ++report.tied_locations;
    }
  }
  return report;
}

}  // namespace permglm
