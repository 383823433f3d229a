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

// Full-matrix ("naive") computation of the five measures. Stores every
// pointwise rank, O(J n) memory, and serves as the reference the streaming
// module is checked against.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "permglm/glm.hpp"
#include "permglm/measure_kind.hpp"
#include "permglm/types.hpp"

namespace permglm {

/// How equal statistics share ordinary ranks.
enum class TiePolicy { mid, min };

/// Continuous rank of the column maximum. `shifted` gives J + 1 - exp(..), in
/// (J, J + 1), so continuous ranks increase strictly with the statistic.
/// `unshifted` gives J - exp(..), which keeps every rank below J but can place
/// the maximum under the runner-up.
enum class ContinuousTop { shifted, unshifted };

/// Ranks one column of J+1 statistics. Reuses its index buffer between calls.
class ColumnRanker {
 public:
  explicit ColumnRanker(TiePolicy ties = TiePolicy::mid,
                        ContinuousTop top = ContinuousTop::shifted)
      : ties_(ties), top_(top) {}

  /// Ordinary ranks, smallest value = 1, ties per policy.
  void ordinary(std::span<const double> column, std::span<double> ranks);

  /// Continuous ranks c(r) in [0, J + 1]; needs J >= 2 (column of at least 3).
  void continuous(std::span<const double> column, std::span<double> ranks);

  /// Both from a single sort. Either output may be empty to skip it.
  void rank(std::span<const double> column, std::span<double> ordinary,
            std::span<double> continuous);

 private:
  void sort_indices(std::span<const double> column);

  TiePolicy ties_;
  ContinuousTop top_;
  std::vector<std::uint32_t> order_;
};

std::vector<double> pointwise_ordinary_ranks(std::span<const double> column,
                                             TiePolicy ties = TiePolicy::mid);
std::vector<double> pointwise_continuous_ranks(std::span<const double> column,
                                               ContinuousTop top = ContinuousTop::shifted);

/// Per-location ranks for every function, (J+1) x n each.
struct PointwiseRanks {
  RowMatrix ordinary;
  RowMatrix continuous;
};

PointwiseRanks pointwise_ranks(const StatField& field, TiePolicy ties = TiePolicy::mid);

/// Per-function scalar measure M_j, j = 0..J.
struct MeasureVector {
  MeasureKind kind = MeasureKind::fmax;
  std::vector<double> values;

  std::size_t functions() const { return values.size(); }
};

/// R_j = min_r (J + 2 - R_j(r)) for row j of the ordinary rank matrix.
double extreme_rank(const RowMatrix& ordinary, std::size_t j);

/// p_j^min = R_j / (J + 1).
MeasureVector pmin_measure(const RowMatrix& ordinary);

/// e_j = #{j' : sorted p-vector of j' precedes that of j lexically} / (J + 1).
/// Compares the sorted one-sided ranks J + 2 - R_j(r), which orders the same
/// way as the p-values.
MeasureVector erl_measure(const RowMatrix& ordinary);

/// c_j = min_r (J + 1 - c_j(r)) / (J + 1).
MeasureVector cont_measure(const RowMatrix& continuous);

/// a_j = (R_j - (1/n) sum_r (R_j - C_j(r)) [C_j(r) < R_j]) / (J + 1) with
/// C_j(r) = J + 1 - c_j(r) and R_j = min_r ceil(C_j(r)).
MeasureVector area_measure(const RowMatrix& continuous);

/// F_j^max = max_r T_j(r).
MeasureVector fmax_measure(const RowMatrix& statistics);

/// #{j : M_j at least as extreme as M_0} / (J + 1).
double monte_carlo_pvalue(const MeasureVector& measure);

/// Number of functions at least as extreme as the observed one.
std::size_t extreme_count(const MeasureVector& measure);

std::map<MeasureKind, MeasureVector> naive_measures(const StatField& field, MeasureSet kinds,
                                                    TiePolicy ties = TiePolicy::mid);

}  // namespace permglm
