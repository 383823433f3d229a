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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "permglm/glm.hpp"
#include "permglm/rank_measures.hpp"
#include "permglm/streaming.hpp"

namespace permglm {

/// One-sided 100(1 - alpha)% global envelope. The lower bound is -inf and
/// is not stored.
struct GlobalEnvelope {
  MeasureKind method = MeasureKind::erl;
  double alpha = 0.05;
  double critical_measure = 0.0;
  double p_value = 1.0;
  std::vector<double> observed;
  std::vector<double> upper;
  std::vector<std::uint8_t> rejected;

  std::size_t rejection_count() const;
  bool any_rejected() const { return rejection_count() > 0; }
};

/// Largest integer count k with k <= alpha (J+1).
std::size_t rejection_threshold(std::size_t functions, double alpha);

/// True when at least one function can fall below the critical value.
inline bool alpha_resolvable(std::size_t functions, double alpha) {
  return rejection_threshold(functions, alpha) >= 1;
}

/// M_(alpha): the largest M_j with #{i : M_i more extreme than M_j} <= alpha (J+1),
/// in the measure's own units.
double critical_value(const MeasureVector& measure, double alpha);

/// Membership mask of I_alpha = {j : M_j not more extreme than M_(alpha)}.
std::vector<std::uint8_t> critical_members(const MeasureVector& measure, double alpha);

/// Envelope from an in-memory field.
GlobalEnvelope envelope_from_field(const StatField& field, const MeasureVector& measure,
                                   double alpha);

/// Second streaming pass: recomputes T_j(r) with the same plan and takes the
/// maximum over I_alpha of each measure. Throws ConsistencyError when the
/// plan's fingerprint differs from the one the measures were computed with.
std::vector<GlobalEnvelope> upper_envelopes(const FunctionalDataset& dataset,
                                            const DesignSpec& design, const PermutationPlan& plan,
                                            std::span<const MeasureVector> measures, double alpha,
                                            std::uint64_t expected_fingerprint,
                                            const StreamingOptions& options = {});

struct Violation {
  static constexpr std::size_t kGlobal = std::numeric_limits<std::size_t>::max();
  std::size_t location = kGlobal;
  std::string reason;
};

struct AuditReport {
  std::vector<Violation> violations;
  /// Locations with tied statistics (only counted when a field is supplied).
  std::size_t tied_locations = 0;

  bool ok() const { return violations.empty(); }
};

/// Checks the envelope against its measure: the rejection mask must equal
/// T_0 > T_up pointwise, the stored p-value must match the measure, and
/// p <= alpha must hold exactly when some location is rejected.
AuditReport envelope_audit(const GlobalEnvelope& envelope, const MeasureVector& measure,
                           const StatField* field = nullptr);

}  // namespace permglm
