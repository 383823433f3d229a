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

#include <vector>

#include "permglm/simd/kernel_lane.hpp"
#include "permglm/simd/kernels.hpp"

namespace permglm::simd::detail {
namespace {

double* coefficient_scratch(std::size_t m) {
  thread_local std::vector<double> scratch;
  if (scratch.size() < m) scratch.resize(m);
  return scratch.data();
}

void f_stat_block_scalar(const ProjectionBasis& basis, const double* const* rows,
                         std::size_t width, double* out) {
  double* coef = coefficient_scratch(basis.columns);
  for (std::size_t b = 0; b < width; ++b) out[b] = lane_f_stat<false>(basis, rows, b, coef);
}

void residualize_block_scalar(const ProjectionBasis& basis, const double* const* rows,
                              std::size_t width, double* out) {
  double* coef = coefficient_scratch(basis.columns);
  for (std::size_t b = 0; b < width; ++b) lane_residualize<false>(basis, rows, b, width, coef, out);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", &f_stat_block_scalar, &residualize_block_scalar};
  return table;
}

}  // namespace permglm::simd::detail
