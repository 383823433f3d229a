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

#include <cstdint>
#include <random>

#include "permglm/dataset_io.hpp"

namespace permglm::testing {

inline RowMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
  return m;
}

inline FunctionalDataset random_dataset(std::size_t s, std::size_t n, std::uint64_t seed) {
  return make_grid_dataset(random_matrix(s, n, seed), n, 1);
}

/// Continuous covariate of interest plus intercept; avoids the exact ties that
/// relabelings of a 0/1 group indicator produce.
inline DesignSpec continuous_design(std::size_t s, std::uint64_t seed) {
  DesignSpec d;
  const RowMatrix x = random_matrix(s, 1, seed ^ 0x5bd1e995u);
  d.interest = x;
  d.nuisance = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(s), 1);
  d.contrast = Eigen::MatrixXd::Ones(1, 1);
  return d;
}

}  // namespace permglm::testing
