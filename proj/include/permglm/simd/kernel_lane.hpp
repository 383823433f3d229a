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

// Single-location reference arithmetic shared by all kernel variants.
// kFused selects std::fma (matching vector lanes) or plain multiply-add
// (the scalar reference, built with -ffp-contract=off). Everything here has
// internal linkage: the header is compiled under different ISA flags and the
// linker must never fold an AVX2 copy into the scalar path.

#include <cmath>
#include <cstddef>

#include "permglm/simd/kernels.hpp"

namespace permglm::simd::detail {
namespace {

/// Finishes an F statistic from the projected sums of squares.
inline double finish_f(double numerator_ss, double rss, double total_ss, double contrast_rank,
                       double residual_dof) {
  const double zero = kZeroSumOfSquares * total_ss;
  if (!(numerator_ss > zero)) return 0.0;
  if (!(rss > zero)) return kDegenerateStatistic;
  return (numerator_ss / contrast_rank) / (rss / residual_dof);
}

template <bool kFused>
inline double madd(double a, double b, double c) {
  if constexpr (kFused) {
    return std::fma(a, b, c);
  } else {
    return a * b + c;
  }
}

/// coef must hold basis.columns doubles.
template <bool kFused>
inline double lane_f_stat(const ProjectionBasis& basis, const double* const* rows, std::size_t b,
                          double* coef) {
  const std::size_t s = basis.subjects;
  const std::size_t m = basis.columns;
  const double* q = basis.q.data();
  double yy = 0.0;
  for (std::size_t c = 0; c < m; ++c) coef[c] = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    const double y = rows[i][b];
    yy = madd<kFused>(y, y, yy);
    for (std::size_t c = 0; c < m; ++c) coef[c] = madd<kFused>(q[i * m + c], y, coef[c]);
  }
  double rss = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    double fit = 0.0;
    for (std::size_t c = 0; c < m; ++c) fit = madd<kFused>(q[i * m + c], coef[c], fit);
    const double r = rows[i][b] - fit;
    rss = madd<kFused>(r, r, rss);
  }
  double num = 0.0;
  for (std::size_t c = m - basis.contrast; c < m; ++c) num = madd<kFused>(coef[c], coef[c], num);
  return finish_f(num, rss, yy, static_cast<double>(basis.contrast), basis.residual_dof());
}

template <bool kFused>
inline void lane_residualize(const ProjectionBasis& basis, const double* const* rows,
                             std::size_t b, std::size_t width, double* coef, double* out) {
  const std::size_t s = basis.subjects;
  const std::size_t m = basis.columns;
  const double* q = basis.q.data();
  for (std::size_t c = 0; c < m; ++c) coef[c] = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    const double y = rows[i][b];
    for (std::size_t c = 0; c < m; ++c) coef[c] = madd<kFused>(q[i * m + c], y, coef[c]);
  }
  for (std::size_t i = 0; i < s; ++i) {
    double fit = 0.0;
    for (std::size_t c = 0; c < m; ++c) fit = madd<kFused>(q[i * m + c], coef[c], fit);
    out[i * width + b] = rows[i][b] - fit;
  }
}

}  // namespace
}  // namespace permglm::simd::detail
