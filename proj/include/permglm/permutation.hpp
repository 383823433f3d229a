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
#include <span>
#include <string_view>
#include <vector>

#include "permglm/dataset_io.hpp"
#include "permglm/types.hpp"

namespace permglm {

enum class Scheme { raw, freedman_lane };

std::string_view to_string(Scheme scheme);
/// Accepts "raw", "freedman-lane" and "freedman_lane".
Scheme parse_scheme(std::string_view name);

/// J subject relabelings. Permutation j (1..J) maps output row i to input
/// row indices[j][i]; slot 0 is always the observed data.
struct PermutationPlan {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::size_t subjects = 0;
  Scheme scheme = Scheme::raw;
  bool excludes_identity = true;
  /// count x subjects, row-major.
  std::vector<std::uint32_t> indices;

  std::size_t functions() const { return count + 1; }
  std::span<const std::uint32_t> permutation(std::size_t j) const;
  /// Hash of every field and index; equal plans have equal fingerprints.
  std::uint64_t fingerprint() const;
};

struct PlanOptions {
  /// Redraw any permutation that comes out as the identity.
  bool exclude_identity = true;
};

/// Draws J uniform permutations; permutation j depends only on (seed, j).
PermutationPlan generate_plan(std::uint64_t seed, std::size_t count, std::size_t subjects,
                              Scheme scheme, PlanOptions options = {});

/// Recomputes permutation j of a plan from its seed alone (for runs that do
/// not keep the plan in memory).
std::vector<std::uint32_t> regenerate_permutation(std::uint64_t seed, std::size_t j,
                                                  std::size_t subjects, PlanOptions options = {});

/// Rows of the responses reordered by permutation j (j in 1..J; 0 = identity).
RowMatrix permute_raw(const FunctionalDataset& dataset, const PermutationPlan& plan,
                      std::size_t j);

/// Freedman-Lane surrogate: per location, Z gamma_hat + P_j e where e are the
/// residuals of the nuisance-only fit. Requires a nonempty nuisance block.
RowMatrix permute_freedman_lane(const FunctionalDataset& dataset, const DesignSpec& design,
                                const PermutationPlan& plan, std::size_t j);

}  // namespace permglm
