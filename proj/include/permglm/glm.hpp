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
#include <span>
#include <vector>

#include "permglm/dataset_io.hpp"
#include "permglm/permutation.hpp"
#include "permglm/simd/kernels.hpp"
#include "permglm/types.hpp"

namespace permglm {

struct FitResult {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  double rss = 0.0;
  std::size_t dof_residual = 0;
};

/// Least squares by column-pivoted Householder QR. Throws RankError when the
/// design is rank deficient, ValidationError when it has no residual dof.
FitResult fit_ols(std::span<const double> y, const Eigen::MatrixXd& design);

struct FValue {
  double value = 0.0;
  /// Set when the full model fits exactly while the effect is nonzero; value
  /// is then simd::kDegenerateStatistic.
  bool degenerate = false;
};

/// A DesignSpec prepared for repeated F tests. The design is reparametrized as
/// W = [Z, X V_null, X V_row] where V_row spans the row space of C and V_null
/// its null space, then orthonormalized by Householder QR. The leading
/// columns of the basis span the reduced model Z + X V_null and the last t
/// columns the tested directions, so
///   RSS_reduced - RSS_full = sum of the last t squared projections.
class ContrastModel {
 public:
  explicit ContrastModel(const DesignSpec& design);

  std::size_t subjects() const { return full_.subjects; }
  std::size_t columns() const { return full_.columns; }
  std::size_t contrast_rank() const { return full_.contrast; }
  std::size_t residual_dof() const { return full_.subjects - full_.columns; }
  std::size_t nuisance_columns() const { return nuisance_.columns; }

  const simd::ProjectionBasis& full_basis() const { return full_; }
  const simd::ProjectionBasis& nuisance_basis() const { return nuisance_; }
  const Eigen::MatrixXd& reparametrized_design() const { return design_; }

  FValue f_statistic(std::span<const double> y,
                     const simd::KernelTable& kernels = simd::active_kernels()) const;

 private:
  Eigen::MatrixXd design_;
  simd::ProjectionBasis full_;
  simd::ProjectionBasis nuisance_;
};

/// F = [(RSS_reduced - RSS_full) / t] / [RSS_full / (s - k - l)].
FValue f_statistic(std::span<const double> y, const DesignSpec& design);

/// Test statistics of the observed data (row 0) and every permutation
/// (rows 1..J), one column per location.
struct StatField {
  RowMatrix values;
  std::size_t degenerate_count = 0;

  std::size_t functions() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t locations() const { return static_cast<std::size_t>(values.cols()); }
};

/// Computes blocks of T_j(r) for a fixed dataset, design and plan. This is the
/// hot loop shared by the in-memory field, the streaming pass and the envelope
/// pass. Under Freedman-Lane the nuisance fit is done once per block and
/// F(Z g + P_j e) is evaluated as F(P_j e), which is identical in exact
/// arithmetic because Z g lies inside the reduced model.
class StatEngine {
 public:
  struct Workspace {
    std::vector<double> residuals;
    std::vector<const double*> rows;
  };

  StatEngine(const FunctionalDataset& dataset, const DesignSpec& design,
             const PermutationPlan& plan,
             const simd::KernelTable& kernels = simd::active_kernels());

  std::size_t functions() const { return plan_->functions(); }
  std::size_t locations() const { return static_cast<std::size_t>(responses_->cols()); }
  const ContrastModel& model() const { return model_; }

  /// Fills out (functions() x width, row-major) with T_j(r) for locations
  /// [first, first + width).
  void compute_block(std::size_t first, std::size_t width, std::span<double> out,
                     Workspace& workspace) const;

 private:
  const RowMatrix* responses_;
  const PermutationPlan* plan_;
  ContrastModel model_;
  const simd::KernelTable* kernels_;
};

struct StatFieldOptions {
  std::size_t block_width = 64;
  const simd::KernelTable* kernels = nullptr;
};

/// Full (J+1) x n field from a plan. Memory O(J n); the streaming module
/// avoids materializing it.
StatField stat_field(const FunctionalDataset& dataset, const DesignSpec& design,
                     const PermutationPlan& plan, const StatFieldOptions& options = {});

/// Field from explicit response matrices, one per function (index 0 = observed).
StatField stat_field(const FunctionalDataset& dataset, const DesignSpec& design,
                     std::span<const RowMatrix> permuted_responses);

}  // namespace permglm
