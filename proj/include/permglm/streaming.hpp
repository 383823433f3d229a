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

// Location-by-location computation of all measures. Each function j carries
// a small augmented state that is updated once per location and can be merged
// with the state of another location block; the (J+1) x n rank matrix is
// never stored.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "permglm/glm.hpp"
#include "permglm/measure_kind.hpp"
#include "permglm/rank_measures.hpp"

namespace permglm {

inline constexpr std::uint32_t kInfiniteRank = std::numeric_limits<std::uint32_t>::max();

/// Running minimum used by p-min and Cont.
inline double update_pmin_cont(double state, double rank) { return rank < state ? rank : state; }

/// (R_j, D_j) pair of the Area measure. D is accumulated in 2^-60 fixed point
/// so that sums are exact and merge order cannot change the result.
struct AreaState {
  std::uint32_t extreme = kInfiniteRank;
  unsigned __int128 excess = 0;

  /// m = C_j(r). Keeps the state when ceil(m) > R, adds ceil(m) - m when
  /// ceil(m) = R, restarts at (ceil(m), ceil(m) - m) when ceil(m) < R.
  void update(double m);
  void merge(const AreaState& other);
  double excess_sum() const;

  friend bool operator==(const AreaState&, const AreaState&) = default;
};

/// Read-only view of one function's ERL slots: the most extreme distinct
/// ranks seen so far (ascending, kInfiniteRank when unused) and their counts.
struct ErlView {
  std::span<const std::uint32_t> ranks;
  std::span<const std::uint32_t> counts;
};

/// Inserts one pointwise rank (smaller = more extreme).
void erl_update(std::span<std::uint32_t> ranks, std::span<std::uint32_t> counts,
                std::uint32_t rank);

/// Folds `other` into (ranks, counts), keeping the most extreme slots.
void erl_merge(std::span<std::uint32_t> ranks, std::span<std::uint32_t> counts, ErlView other);

enum class Extremeness { first, second, tie };

/// Walks the slots from the most extreme: a smaller rank wins, then a larger
/// count; equal slots all the way through is a tie.
Extremeness erl_compare(ErlView a, ErlView b);

/// Owning ERL state for a single function.
struct ErlState {
  explicit ErlState(std::size_t slots = 6)
      : ranks(slots, kInfiniteRank), counts(slots, 0) {}
  void update(std::uint32_t rank) { erl_update(ranks, counts, rank); }
  ErlView view() const { return {ranks, counts}; }

  std::vector<std::uint32_t> ranks;
  std::vector<std::uint32_t> counts;
};

/// Augmented measures of all J+1 functions for a set of measure kinds.
class AugmentedMeasures {
 public:
  AugmentedMeasures(std::size_t functions, MeasureSet kinds, std::size_t erl_slots = 6);

  std::size_t functions() const { return functions_; }
  std::size_t locations() const { return locations_; }
  std::size_t erl_slots() const { return slots_; }
  MeasureSet kinds() const { return kinds_; }

  /// One location: statistics T_j(r), ordinary ranks R_j(r) and continuous
  /// ranks c_j(r). Rank spans may be empty when no requested kind needs them.
  void add_location(std::span<const double> statistics, std::span<const double> ordinary,
                    std::span<const double> continuous);

  /// Combines with the state of a disjoint set of locations.
  void merge(const AugmentedMeasures& other);

  /// Final measure vectors (values scaled by 1/(J+1) as in the naive module).
  std::map<MeasureKind, MeasureVector> finalize() const;

  ErlView erl_state(std::size_t j) const;
  const AreaState& area_state(std::size_t j) const { return area_[j]; }

  /// Functions whose ERL order is tied only because the slots ran out
  /// (slot counts do not cover every location).
  std::size_t erl_truncated_ties() const;

  void save(std::ostream& out) const;
  static AugmentedMeasures load(std::istream& in);

  friend bool operator==(const AugmentedMeasures&, const AugmentedMeasures&) = default;

 private:
  std::size_t functions_;
  std::size_t slots_;
  MeasureSet kinds_;
  std::size_t locations_ = 0;
  std::vector<double> pmin_;
  std::vector<double> cont_;
  std::vector<double> fmax_;
  std::vector<AreaState> area_;
  std::vector<std::uint32_t> erl_ranks_;
  std::vector<std::uint32_t> erl_counts_;
};

/// Final ERL measure from augmented states: e_j = #{strictly more extreme} / (J+1).
MeasureVector erl_from_states(const AugmentedMeasures& state);

struct StreamingOptions {
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  std::size_t threads = 1;
  /// Locations per kernel call. Working memory grows as (J+1) x block_width.
  std::size_t block_width = 16;
  /// Locations handed to a worker at a time.
  std::size_t chunk_locations = 256;
  TiePolicy ties = TiePolicy::mid;
  std::size_t erl_slots = 6;
  const simd::KernelTable* kernels = nullptr;
};

struct StreamingResult {
  std::map<MeasureKind, MeasureVector> measures;
  AugmentedMeasures state;
  std::uint64_t plan_fingerprint = 0;
  std::size_t degenerate_count = 0;
};

/// Updates `state` with locations [first, last).
void scan_locations(const StatEngine& engine, std::size_t first, std::size_t last,
                    const StreamingOptions& options, AugmentedMeasures& state,
                    std::size_t* degenerate_count = nullptr);

/// Full streaming pass over every location.
StreamingResult streaming_run(const FunctionalDataset& dataset, const DesignSpec& design,
                              const PermutationPlan& plan, MeasureSet kinds,
                              const StreamingOptions& options = {});

/// Checkpoint of a partial scan: augmented state plus the plan fingerprint
/// and the next unprocessed location.
struct Checkpoint {
  AugmentedMeasures state;
  std::uint64_t plan_fingerprint = 0;
  std::size_t next_location = 0;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::size_t resolve_thread_count(std::size_t requested);

}  // namespace permglm
