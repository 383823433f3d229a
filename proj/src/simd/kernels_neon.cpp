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

// NEON variant for AArch64, two locations per 128-bit register.

#include <arm_neon.h>

#include <array>
#include <vector>

#include "permglm/simd/kernel_lane.hpp"
#include "permglm/simd/kernels.hpp"

namespace permglm::simd::detail {
namespace {

constexpr std::size_t kLanes = 2;
constexpr std::size_t kMaxRegisterColumns = 8;

double* coefficient_scratch(std::size_t m) {
  thread_local std::vector<double> scratch;
  if (scratch.size() < m) scratch.resize(m);
  return scratch.data();
}

void f_stat_block_neon(const ProjectionBasis& basis, const double* const* rows,
                       std::size_t width, double* out) {
  const std::size_t s = basis.subjects;
  const std::size_t m = basis.columns;
  const double* q = basis.q.data();
  const double t = static_cast<double>(basis.contrast);
  const double dof = basis.residual_dof();
  std::size_t b = 0;
  if (m <= kMaxRegisterColumns) {
    float64x2_t coef[kMaxRegisterColumns];
    for (; b + kLanes <= width; b += kLanes) {
      float64x2_t yy = vdupq_n_f64(0.0);
      for (std::size_t c = 0; c < m; ++c) coef[c] = vdupq_n_f64(0.0);
      for (std::size_t i = 0; i < s; ++i) {
        const float64x2_t y = vld1q_f64(rows[i] + b);
        yy = vfmaq_f64(yy, y, y);
        const double* qi = q + i * m;
        for (std::size_t c = 0; c < m; ++c) coef[c] = vfmaq_f64(coef[c], vdupq_n_f64(qi[c]), y);
      }
      float64x2_t rss = vdupq_n_f64(0.0);
      for (std::size_t i = 0; i < s; ++i) {
        const double* qi = q + i * m;
        float64x2_t fit = vdupq_n_f64(0.0);
        for (std::size_t c = 0; c < m; ++c) fit = vfmaq_f64(fit, vdupq_n_f64(qi[c]), coef[c]);
        const float64x2_t r = vsubq_f64(vld1q_f64(rows[i] + b), fit);
        rss = vfmaq_f64(rss, r, r);
      }
      float64x2_t num = vdupq_n_f64(0.0);
      for (std::size_t c = m - basis.contrast; c < m; ++c) num = vfmaq_f64(num, coef[c], coef[c]);
      out[b] = finish_f(vgetq_lane_f64(num, 0), vgetq_lane_f64(rss, 0), vgetq_lane_f64(yy, 0), t, dof);
      out[b + 1] =
          finish_f(vgetq_lane_f64(num, 1), vgetq_lane_f64(rss, 1), vgetq_lane_f64(yy, 1), t, dof);
    }
  }
  double* scratch = coefficient_scratch(m);
  for (; b < width; ++b) out[b] = lane_f_stat<true>(basis, rows, b, scratch);
}

void residualize_block_neon(const ProjectionBasis& basis, const double* const* rows,
                            std::size_t width, double* out) {
  const std::size_t s = basis.subjects;
  const std::size_t m = basis.columns;
  const double* q = basis.q.data();
  std::size_t b = 0;
  if (m <= kMaxRegisterColumns) {
    float64x2_t coef[kMaxRegisterColumns];
    for (; b + kLanes <= width; b += kLanes) {
      for (std::size_t c = 0; c < m; ++c) coef[c] = vdupq_n_f64(0.0);
      for (std::size_t i = 0; i < s; ++i) {
        const float64x2_t y = vld1q_f64(rows[i] + b);
        const double* qi = q + i * m;
        for (std::size_t c = 0; c < m; ++c) coef[c] = vfmaq_f64(coef[c], vdupq_n_f64(qi[c]), y);
      }
      for (std::size_t i = 0; i < s; ++i) {
        const double* qi = q + i * m;
        float64x2_t fit = vdupq_n_f64(0.0);
        for (std::size_t c = 0; c < m; ++c) fit = vfmaq_f64(fit, vdupq_n_f64(qi[c]), coef[c]);
        vst1q_f64(out + i * width + b, vsubq_f64(vld1q_f64(rows[i] + b), fit));
      }
    }
  }
  double* scratch = coefficient_scratch(m);
  for (; b < width; ++b) lane_residualize<true>(basis, rows, b, width, scratch, out);
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{"neon", &f_stat_block_neon, &residualize_block_neon};
  return table;
}

}  // namespace permglm::simd::detail
