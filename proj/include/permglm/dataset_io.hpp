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
#include <filesystem>
#include <vector>

#include "permglm/types.hpp"

namespace permglm {

/// Geometry of the observation domain. Either a W x H pixel grid with unit
/// spacing (location id = y * W + x) or an explicit list of points in R^d.
struct Domain {
  enum class Kind { grid, points };

  Kind kind = Kind::grid;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t dimension = 0;
  /// Point coordinates, dimension x n, row k holds axis k. Empty for grids.
  RowMatrix coordinates;

  static Domain grid(std::size_t width, std::size_t height);
  static Domain points(RowMatrix coordinates);

  std::size_t size() const;
  friend bool operator==(const Domain& a, const Domain& b);
};

/// Subjects x locations response matrix plus its domain.
struct FunctionalDataset {
  RowMatrix responses;
  Domain domain;
  std::vector<std::size_t> location_ids;

  std::size_t subjects() const { return static_cast<std::size_t>(responses.rows()); }
  std::size_t locations() const { return static_cast<std::size_t>(responses.cols()); }

  /// Throws ValidationError naming the offending (subject, location) for
  /// non-finite values, or describing the violated shape constraint.
  void validate() const;
};

/// Builds a dataset over a W x H grid with ids 0..n-1 and validates it.
FunctionalDataset make_grid_dataset(RowMatrix responses, std::size_t width, std::size_t height);

/// Location-constant design: interest X (s x k), nuisance Z (s x l) and
/// contrast C (t x k) for H0: C beta = 0.
struct DesignSpec {
  Eigen::MatrixXd interest;
  Eigen::MatrixXd nuisance;
  Eigen::MatrixXd contrast;
  /// An empty nuisance block is only accepted when this is set.
  bool allow_no_intercept = false;

  std::size_t subjects() const { return static_cast<std::size_t>(interest.rows()); }
  std::size_t k() const { return static_cast<std::size_t>(interest.cols()); }
  std::size_t l() const { return static_cast<std::size_t>(nuisance.cols()); }
  std::size_t t() const { return static_cast<std::size_t>(contrast.rows()); }

  /// Shape checks, finiteness, intercept presence, and the two rank checks
  /// (full design [X Z] and contrast rows). Rank uses an SVD with tolerance
  /// 1e-10 times the largest singular value.
  void validate() const;
};

/// Two-group design: X is the 0/1 indicator of the second group, Z the
/// intercept, C = [1].
DesignSpec two_group_design(std::size_t first_group, std::size_t second_group);

/// Numerical rank with threshold `rel_tol * sigma_max`.
std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

enum class DataFormat { csv, binary };

/// Dataset CSV: `# domain: grid W H` or `# domain: points d`, followed for
/// point domains by d lines `# coord: v_1,...,v_n`, then one row per subject.
/// Binary: u64 rows, u64 cols, then rows*cols little-endian f64, row-major;
/// the domain is read back as a cols x 1 grid.
FunctionalDataset load_dataset(const std::filesystem::path& path, DataFormat format);
void save_dataset(const FunctionalDataset& dataset, const std::filesystem::path& path,
                  DataFormat format);

/// Design CSV: `# design: k=K l=L t=T [intercept=none]`, then T contrast rows
/// of K values, then one row of K + L values (X columns first) per subject.
DesignSpec load_design(const std::filesystem::path& path);
void save_design(const DesignSpec& design, const std::filesystem::path& path);

/// Picks the format from the extension: `.bin`/`.raw` binary, anything else CSV.
DataFormat format_for_path(const std::filesystem::path& path);

}  // namespace permglm
