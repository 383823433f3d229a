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

// AVX2 + FMA variant, four locations per 256-bit register. Compiled with
// -mavx2 -mfma and only reached after a runtime CPU check.

#include <immintrin.h>

#include <vector>

#include "permglm/simd/kernel_lane.hpp"
#include "permglm/simd/kernels.hpp"

namespace permglm::simd::detail {
namespace {

constexpr std::size_t kLanes = 4;
constexpr std::size_t kMaxRegisterColumns = 8;

double* coefficient_scratch(std::size_t m) {
  thread_local std::vector<double> scratch;
  if (scratch.size() < m) scratch.resize(m);
  return scratch.data();
}

void f_stat_block_avx2(const ProjectionBasis& basis, const double* const* rows,
                       std::size_t width, double* out) {
  const std::size_t s = basis.subjects;
  const std::size_t m = basis.columns;
  const double* q = basis.q.data();
  const double t = static_cast<double>(basis.contrast);
  const double dof = basis.residual_dof();
  std::size_t b = 0;
  if (m <= kMaxRegisterColumns) {
    __m256d coef[kMaxRegisterColumns];
    alignas(32) double num_l[kLanes], rss_l[kLanes], yy_l[kLanes];
    for (; b + kLanes <= width; b += kLanes) {
      __m256d yy = _mm256_setzero_pd();
      for (std::size_t c = 0; c < m; ++c) coef[c] = _mm256_setzero_pd();
      for (std::size_t i = 0; i < s; ++i) {
        const __m256d y = _mm256_loadu_pd(rows[i] + b);
        yy = _mm256_fmadd_pd(y, y, yy);
        const double* qi = q + i * m;
        for (std::size_t c = 0; c < m; ++c)
          coef[c] = _mm256_fmadd_pd(_mm256_set1_pd(qi[c]), y, coef[c]);
      }
      __m256d rss = _mm256_setzero_pd();
      for (std::size_t i = 0; i < s; ++i) {
        const double* qi = q + i * m;
        __m256d fit = _mm256_setzero_pd();
        for (std::size_t c = 0; c < m; ++c)
          fit = _mm256_fmadd_pd(_mm256_set1_pd(qi[c]), coef[c], fit);
        const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(rows[i] + b), fit);
        rss = _mm256_fmadd_pd(r, r, rss);
      }
      __m256d num = _mm256_setzero_pd();
      for (std::size_t c = m - basis.contrast; c < m; ++c)
        num = _mm256_fmadd_pd(coef[c], coef[c], num);
      _mm256_store_pd(num_l, num);
      _mm256_store_pd(rss_l, rss);
      _mm256_store_pd(yy_l, yy);
      for (std::size_t l = 0; l < kLanes; ++l)
        out[b + l] = finish_f(num_l[l], rss_l[l], yy_l[l], t, dof);
    }
  }
  double* scratch = coefficient_scratch(m);
  for (; b < width; ++b) out[b] = lane_f_stat<true>(basis, rows, b, scratch);
}

void residualize_block_avx2(const ProjectionBasis& basis, const double* const* rows,
                            std::size_t width, double* out) {
  const std::size_t s = basis.subjects;
  const std::size_t m = basis.columns;
  const double* q = basis.q.data();
  std::size_t b = 0;
  if (m <= kMaxRegisterColumns) {
    __m256d coef[kMaxRegisterColumns];
    for (; b + kLanes <= width; b += kLanes) {
      for (std::size_t c = 0; c < m; ++c) coef[c] = _mm256_setzero_pd();
      for (std::size_t i = 0; i < s; ++i) {
        const __m256d y = _mm256_loadu_pd(rows[i] + b);
        const double* qi = q + i * m;
        for (std::size_t c = 0; c < m; ++c)
          coef[c] = _mm256_fmadd_pd(_mm256_set1_pd(qi[c]), y, coef[c]);
      }
      for (std::size_t i = 0; i < s; ++i) {
        const double* qi = q + i * m;
        __m256d fit = _mm256_setzero_pd();
        for (std::size_t c = 0; c < m; ++c)
          fit = _mm256_fmadd_pd(_mm256_set1_pd(qi[c]), coef[c], fit);
        _mm256_storeu_pd(out + i * width + b, _mm256_sub_pd(_mm256_loadu_pd(rows[i] + b), fit));
      }
    }
  }
  double* scratch = coefficient_scratch(m);
  for (; b < width; ++b) lane_residualize<true>(basis, rows, b, width, scratch, out);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", &f_stat_block_avx2, &residualize_block_avx2};
  return table;
}

}  // namespace permglm::simd::detail
