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

#include "permglm/permutation.hpp"

#include <numeric>
#include <string>

#include "permglm/error.hpp"
#include "permglm/philox.hpp"

namespace permglm {

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::raw ? "raw" : "freedman-lane";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "raw") return Scheme::raw;
  if (name == "freedman-lane" || name == "freedman_lane") return Scheme::freedman_lane;
  throw ConfigError("unknown scheme '" + std::string(name) + "' (expected raw or freedman-lane)");
}

std::span<const std::uint32_t> PermutationPlan::permutation(std::size_t j) const {
  if (j == 0 || j > count) throw ConfigError("permutation index out of range");
  return {indices.data() + (j - 1) * subjects, subjects};
}

std::uint64_t PermutationPlan::fingerprint() const {
  // FNV-1a over the header fields and every index.
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ull;
    }
  };
  mix(seed);
  mix(count);
  mix(subjects);
  mix(static_cast<std::uint64_t>(scheme));
  mix(excludes_identity ? 1 : 0);
  for (auto v : indices) mix(v);
  return h;
}

std::vector<std::uint32_t> regenerate_permutation(std::uint64_t seed, std::size_t j,
                                                  std::size_t subjects, PlanOptions options) {
  std::vector<std::uint32_t> perm(subjects);
  CounterRng rng(seed, j);
  while (true) {
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = subjects; i > 1; --i) {
      const auto r = rng.bounded(static_cast<std::uint32_t>(i));
      std::swap(perm[i - 1], perm[r]);
    }
    if (!options.exclude_identity || subjects < 2) break;
    bool identity = true;
    for (std::size_t i = 0; i < subjects && identity; ++i) identity = perm[i] == i;
    if (!identity) break;
  }
  return perm;
}

PermutationPlan generate_plan(std::uint64_t seed, std::size_t count, std::size_t subjects,
                              Scheme scheme, PlanOptions options) {
  if (count < 1) throw ConfigError("number of permutations must be at least 1");
  if (subjects < 2) throw ConfigError("at least 2 subjects are needed to permute");
  if (subjects > 0xffffffffull) throw ConfigError("too many subjects");
  PermutationPlan plan;
  plan.seed = seed;
  plan.count = count;
  plan.subjects = subjects;
  plan.scheme = scheme;
  plan.excludes_identity = options.exclude_identity;
  plan.indices.reserve(count * subjects);
  for (std::size_t j = 1; j <= count; ++j) {
    const auto perm = regenerate_permutation(seed, j, subjects, options);
    plan.indices.insert(plan.indices.end(), perm.begin(), perm.end());
  }
  return plan;
}

RowMatrix permute_raw(const FunctionalDataset& dataset, const PermutationPlan& plan,
                      std::size_t j) {
  if (plan.subjects != dataset.subjects())
    throw ConsistencyError("plan and dataset disagree on the number of subjects");
  if (j == 0) return dataset.responses;
  const auto perm = plan.permutation(j);
  RowMatrix out(dataset.responses.rows(), dataset.responses.cols());
  for (std::size_t i = 0; i < perm.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = dataset.responses.row(perm[i]);
  return out;
}

RowMatrix permute_freedman_lane(const FunctionalDataset& dataset, const DesignSpec& design,
                                const PermutationPlan& plan, std::size_t j) {
  if (design.l() == 0) throw ConfigError("Freedman-Lane needs a nonempty nuisance block");
  if (plan.subjects != dataset.subjects() || design.subjects() != dataset.subjects())
    throw ConsistencyError("plan, design and dataset disagree on the number of subjects");
  const Eigen::MatrixXd y = dataset.responses;
  const Eigen::MatrixXd gamma = design.nuisance.colPivHouseholderQr().solve(y);
  const Eigen::MatrixXd fitted = design.nuisance * gamma;
  const Eigen::MatrixXd resid = y - fitted;
  RowMatrix out = fitted;
  if (j == 0) {
    out += resid;
    return out;
  }
  const auto perm = plan.permutation(j);
  for (std::size_t i = 0; i < perm.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) += resid.row(perm[i]);
  return out;
}

}  // namespace permglm
